use std::fmt;

use crate::error::{invalid, Result};
use crate::model::{CoreFunction, LccpProblem};
use crate::Scalar;

/// Step parameters and budget of a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverParams<T> {
    /// Primal step `ε`.
    pub epsilon: T,
    /// Augmentation weight `γ`.
    pub gamma: T,
    /// Dual step `ρ`.
    pub rho: T,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop once the KKT residual is at most this; `0` disables the test.
    pub tol_kkt: T,
    /// Fraction of the step window used by [`auto_params`].
    pub safety: T,
    /// Evaluate the stopping test every this many iterations.
    pub kkt_every: usize,
}

impl<T: Scalar> SolverParams<T> {
    pub fn new(epsilon: T, gamma: T, rho: T) -> Self {
        Self {
            epsilon,
            gamma,
            rho,
            seed: 0,
            max_iter: 10_000,
            tol_kkt: T::lit(1e-8),
            safety: T::lit(0.9),
            kkt_every: 1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_tol(mut self, tol_kkt: T) -> Self {
        self.tol_kkt = tol_kkt;
        self
    }

    pub fn with_kkt_every(mut self, every: usize) -> Self {
        self.kkt_every = every.max(1);
        self
    }
}

/// Open interval bounds for `ε` and `ρ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamWindow<T> {
    /// `β / [B_G + γ λ_max(AᵀA)]`
    pub epsilon_bound: T,
    /// `2γ / (2N − 1)`
    pub rho_bound: T,
}

impl<T: Scalar> ParamWindow<T> {
    pub fn compute(problem: &LccpProblem<T>, core: &CoreFunction<T>, gamma: T) -> Self {
        let n_blocks = T::from_usize_lossy(problem.num_blocks());
        let two = T::lit(2.0);
        Self {
            epsilon_bound: core.beta()
                / (problem.lipschitz_g() + gamma * problem.lambda_max_ata_bound()),
            rho_bound: two * gamma / (two * n_blocks - T::one()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ParamViolation<T> {
    NonPositive { name: &'static str, value: T },
    EpsilonUpper { value: T, bound: T },
    RhoUpper { value: T, bound: T },
    NonSeparableCore,
}

impl<T: Scalar> fmt::Display for ParamViolation<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamViolation::NonPositive { name, value } => {
                write!(f, "{name} must be positive, got {value}")
            }
            ParamViolation::EpsilonUpper { value, bound } => write!(
                f,
                "epsilon upper bound violated: need epsilon < beta/[B_G + gamma*lambda_max(A^T A)] = {bound}, got {value}"
            ),
            ParamViolation::RhoUpper { value, bound } => write!(
                f,
                "rho upper bound violated: need rho < 2*gamma/(2N - 1) = {bound}, got {value}"
            ),
            ParamViolation::NonSeparableCore => write!(
                f,
                "quadratic core must be diagonal for a closed-form block step"
            ),
        }
    }
}

/// Outcome of [`validate_params`] when at least one bound fails.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamReport<T> {
    pub window: ParamWindow<T>,
    pub violations: Vec<ParamViolation<T>>,
}

impl<T: Scalar> fmt::Display for ParamReport<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl<T: Scalar> std::error::Error for ParamReport<T> {}

/// Checks `0 < ε < β/[B_G + γλ_max(AᵀA)]` and `0 < ρ < 2γ/(2N−1)`.
pub fn validate_params<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    params: &SolverParams<T>,
) -> std::result::Result<ParamWindow<T>, ParamReport<T>> {
    check(problem, core, params, true)
}

/// Like [`validate_params`] but only the primal window, which is all the
/// APP-AL iteration needs.
pub(crate) fn validate_primal<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    params: &SolverParams<T>,
) -> std::result::Result<ParamWindow<T>, ParamReport<T>> {
    check(problem, core, params, false)
}

fn check<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    params: &SolverParams<T>,
    with_dual: bool,
) -> std::result::Result<ParamWindow<T>, ParamReport<T>> {
    let window = ParamWindow::compute(problem, core, params.gamma);
    let mut violations = Vec::new();
    let mut positive = |name, value: T| {
        if !(value > T::zero()) {
            violations.push(ParamViolation::NonPositive { name, value });
        }
    };
    positive("epsilon", params.epsilon);
    positive("gamma", params.gamma);
    if with_dual {
        positive("rho", params.rho);
    }
    if !(params.epsilon < window.epsilon_bound) {
        violations.push(ParamViolation::EpsilonUpper {
            value: params.epsilon,
            bound: window.epsilon_bound,
        });
    }
    if with_dual && !(params.rho < window.rho_bound) {
        violations.push(ParamViolation::RhoUpper {
            value: params.rho,
            bound: window.rho_bound,
        });
    }
    if !core.is_separable() {
        violations.push(ParamViolation::NonSeparableCore);
    }
    if violations.is_empty() {
        Ok(window)
    } else {
        Err(ParamReport { window, violations })
    }
}

/// Picks `ε` and `ρ` as the fraction `safety` of their windows.
pub fn auto_params<T: Scalar>(
    problem: &LccpProblem<T>,
    core: &CoreFunction<T>,
    gamma: T,
    safety: T,
) -> Result<SolverParams<T>> {
    if !(gamma > T::zero()) {
        return invalid(format!("gamma must be positive, got {gamma}"));
    }
    if !(safety > T::zero() && safety < T::one()) {
        return invalid(format!("safety must lie in (0, 1), got {safety}"));
    }
    if problem.lipschitz_g() == T::zero() && problem.lambda_max_ata() == T::zero() {
        return invalid("degenerate problem: B_G and lambda_max(A^T A) are both zero");
    }
    let w = ParamWindow::compute(problem, core, gamma);
    let mut params = SolverParams::new(safety * w.epsilon_bound, gamma, safety * w.rho_bound);
    params.safety = safety;
    Ok(params)
}
