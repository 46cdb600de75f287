use ndarray::s;

use crate::diagnostics::{RunMetadata, TraceRecorder};
use crate::error::{Error, Result};
use crate::model::{CoreFunction, LccpProblem};
use crate::runner::{drive, Budget, Callback, RunFailure, RunOutcome};
use crate::solver::{primal_block_update, Iterate, SolverParams};
use crate::Scalar;

/// Deterministic APP-AL: a full linearized proximal step on every block at
/// once, then `p⁺ = p + γ(Au⁺ − b)`. `params.rho` is ignored.
#[derive(Clone, Debug)]
pub struct AppAl<'a, T: Scalar> {
    problem: &'a LccpProblem<T>,
    core: &'a CoreFunction<T>,
    params: SolverParams<T>,
}

impl<'a, T: Scalar> AppAl<'a, T> {
    /// Checks the primal window only; the dual step is `γ`.
    pub fn new(
        problem: &'a LccpProblem<T>,
        core: &'a CoreFunction<T>,
        params: SolverParams<T>,
    ) -> Result<Self> {
        crate::solver::validate_primal(problem, core, &params)
            .map_err(|r| Error::Params(r.to_string()))?;
        Ok(Self::unchecked(problem, core, params))
    }

    pub fn unchecked(
        problem: &'a LccpProblem<T>,
        core: &'a CoreFunction<T>,
        params: SolverParams<T>,
    ) -> Self {
        Self {
            problem,
            core,
            params,
        }
    }

    pub fn params(&self) -> &SolverParams<T> {
        &self.params
    }

    /// `T(w) = (T_u(w), T_p(w))`.
    pub fn apply(&self, state: &Iterate<T>) -> Result<Iterate<T>> {
        let mut next = state.clone();
        self.step(&mut next)?;
        Ok(next)
    }

    pub fn step(&self, state: &mut Iterate<T>) -> Result<()> {
        let mut u = state.u.clone();
        for (i, r) in self.problem.partition().ranges().enumerate() {
            let x = primal_block_update(self.problem, self.core, self.params.epsilon, state, i)?;
            u.slice_mut(s![r]).assign(&x);
        }
        state.advance(self.problem, u, self.params.gamma, self.params.gamma);
        Ok(())
    }

    pub fn metadata(&self) -> RunMetadata {
        let mut meta = RunMetadata::for_problem(self.problem, "appal").with_params(&self.params, None);
        meta.rho = self.params.gamma.to_f64_lossy();
        meta
    }

    pub fn run(
        &self,
        init: Iterate<T>,
        recorder: TraceRecorder<'_, T>,
        callbacks: &mut [&mut dyn Callback<T>],
    ) -> std::result::Result<RunOutcome<T>, RunFailure<T>> {
        drive(
            self.problem,
            init,
            Budget::from_params(&self.params),
            recorder,
            self.metadata(),
            callbacks,
            |state| self.step(state),
        )
    }
}

/// One APP-AL iteration from `state`, i.e. `T(w)`.
pub fn appal_step<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    params: &SolverParams<T>,
    state: &Iterate<T>,
) -> Result<Iterate<T>> {
    AppAl::unchecked(problem, core, *params).apply(state)
}
