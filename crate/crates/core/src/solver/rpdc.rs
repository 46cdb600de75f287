use ndarray::{s, Array1};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::iterate::Iterate;
use super::params::{validate_params, SolverParams};
use crate::diagnostics::{RunMetadata, TraceRecorder};
use crate::error::{Error, Result};
use crate::model::{CoreFunction, CoreKind, LccpProblem};
use crate::runner::{drive, Budget, Callback, RunFailure, RunOutcome};
use crate::Scalar;

/// Portable seeded generator used for block selection.
pub type SolverRng = ChaCha8Rng;

pub fn solver_rng(seed: u64) -> SolverRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest block count for which expectations are enumerated exactly.
pub const ENUMERATION_CAP: usize = 64;

/// Minimizer of the linearized block subproblem
/// `⟨∇_i G(u) + A_iᵀq, x⟩ + J_i(x) + D(x, u_i)/ε` over `U_i`.
///
/// For `K = ½‖·‖²` this is `prox_{εJ_i}(u_i − ε(∇_i G(u) + A_iᵀq))`; a
/// diagonal quadratic core gives the same step with per-coordinate
/// `ε / Q_jj`.
pub(crate) fn primal_block_update<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    epsilon: T,
    state: &Iterate<T>,
    block: usize,
) -> Result<Array1<T>> {
    let range = problem.partition().range(block)?;
    let mut grad = problem.block_gradient(block, state.u.view())?;
    grad += &problem.a().slice(s![.., range.clone()]).t().dot(&state.q);
    let current = state.u.slice(s![range]);
    match core.kind() {
        CoreKind::HalfSquaredNorm => {
            let v = &current - &(&grad * epsilon);
            problem.block_prox(block, v.view(), epsilon)
        }
        CoreKind::Quadratic(_) => {
            let diag = core.diagonal().ok_or_else(|| {
                Error::Unsupported("non-diagonal quadratic core has no closed-form block step".into())
            })?;
            let r = problem.partition().range(block)?;
            let steps = diag.slice(s![r]).mapv(|d| epsilon / d);
            let v = &current - &(&grad * &steps);
            problem.nonsmooth().block_prox_scaled(block, v.view(), steps.view())
        }
    }
}

/// Exact expectation of the next RPDC iterate over the uniform block draw.
#[derive(Clone, Debug)]
pub struct BlockExpectation<T> {
    pub mean_u: Array1<T>,
    pub mean_p: Array1<T>,
    /// Candidate next iterate for each block choice, in block order.
    pub candidates: Vec<Iterate<T>>,
}

/// Randomized primal-dual coordinate solver bound to a problem.
#[derive(Clone, Debug)]
pub struct Rpdc<'a, T: Scalar> {
    problem: &'a LccpProblem<T>,
    core: &'a CoreFunction<T>,
    params: SolverParams<T>,
}

impl<'a, T: Scalar> Rpdc<'a, T> {
    /// Rejects parameters outside the convergence window.
    pub fn new(
        problem: &'a LccpProblem<T>,
        core: &'a CoreFunction<T>,
        params: SolverParams<T>,
    ) -> Result<Self> {
        validate_params(problem, core, &params).map_err(|r| Error::Params(r.to_string()))?;
        Ok(Self::unchecked(problem, core, params))
    }

    /// No window check; for experiments outside the theory.
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

    pub fn problem(&self) -> &'a LccpProblem<T> {
        self.problem
    }

    pub fn core(&self) -> &'a CoreFunction<T> {
        self.core
    }

    pub fn params(&self) -> &SolverParams<T> {
        &self.params
    }

    pub fn initial_state(&self) -> Result<Iterate<T>> {
        Iterate::initial(self.problem, self.params.gamma)
    }

    pub fn state(&self, u: Array1<T>, p: Array1<T>) -> Result<Iterate<T>> {
        Iterate::new(self.problem, u, p, self.params.gamma)
    }

    pub fn draw_block<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        rng.random_range(0..self.problem.num_blocks())
    }

    /// Applies the update for a given block choice in place.
    pub fn step_block(&self, state: &mut Iterate<T>, block: usize) -> Result<()> {
        let x = primal_block_update(self.problem, self.core, self.params.epsilon, state, block)?;
        let mut u = state.u.clone();
        let r = self.problem.partition().range(block)?;
        u.slice_mut(s![r]).assign(&x);
        state.advance(self.problem, u, self.params.rho, self.params.gamma);
        Ok(())
    }

    /// One RPDC iteration; returns the block that was drawn.
    pub fn step<R: Rng + ?Sized>(&self, state: &mut Iterate<T>, rng: &mut R) -> Result<usize> {
        let block = self.draw_block(rng);
        self.step_block(state, block)?;
        Ok(block)
    }

    /// Next iterate if `block` were drawn.
    pub fn candidate(&self, state: &Iterate<T>, block: usize) -> Result<Iterate<T>> {
        let mut next = state.clone();
        self.step_block(&mut next, block)?;
        Ok(next)
    }

    pub fn expectation(&self, state: &Iterate<T>) -> Result<BlockExpectation<T>> {
        let n_blocks = self.problem.num_blocks();
        if n_blocks > ENUMERATION_CAP {
            return Err(Error::Unsupported(format!(
                "{n_blocks} blocks exceeds the enumeration cap of {ENUMERATION_CAP}"
            )));
        }
        let candidates = (0..n_blocks)
            .map(|i| self.candidate(state, i))
            .collect::<Result<Vec<_>>>()?;
        let weight = T::one() / T::from_usize_lossy(n_blocks);
        let mut mean_u = Array1::zeros(self.problem.dim_primal());
        let mut mean_p = Array1::zeros(self.problem.dim_dual());
        for c in &candidates {
            mean_u.scaled_add(weight, &c.u);
            mean_p.scaled_add(weight, &c.p);
        }
        Ok(BlockExpectation {
            mean_u,
            mean_p,
            candidates,
        })
    }

    pub fn metadata(&self) -> RunMetadata {
        RunMetadata::for_problem(self.problem, "rpdc").with_params(&self.params, Some(self.params.seed))
    }

    /// Iterates until `max_iter` or the KKT tolerance is met. The generator
    /// is seeded from `params.seed`, so runs are reproducible.
    pub fn run(
        &self,
        init: Iterate<T>,
        recorder: TraceRecorder<'_, T>,
        callbacks: &mut [&mut dyn Callback<T>],
    ) -> std::result::Result<RunOutcome<T>, RunFailure<T>> {
        let mut rng = solver_rng(self.params.seed);
        drive(
            self.problem,
            init,
            Budget::from_params(&self.params),
            recorder,
            self.metadata(),
            callbacks,
            |state| self.step(state, &mut rng).map(|_| ()),
        )
    }
}

/// Averages the `N` possible next iterates from `state`.
pub fn enumerate_block_expectation<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    params: &SolverParams<T>,
    state: &Iterate<T>,
) -> Result<BlockExpectation<T>> {
    Rpdc::unchecked(problem, core, *params).expectation(state)
}
