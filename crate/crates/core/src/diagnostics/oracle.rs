use std::fmt;

use ndarray::Array1;

use super::kkt::{kkt_residual, lagrangian};
use crate::baselines::AppAl;
use crate::diagnostics::TraceRecorder;
use crate::error::{invalid, Error, Result};
use crate::model::{CoreFunction, LccpProblem};
use crate::solver::{auto_params, Iterate};
use crate::Scalar;

/// Residual and feasibility bound a saddle reference must meet.
pub const SADDLE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SaddleSource {
    Analytic,
    Planted,
    OracleRun,
}

/// High-accuracy saddle point `(u*, p*)` used as ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct SaddleReference<T> {
    pub u_star: Array1<T>,
    pub p_star: Array1<T>,
    /// `F(u*)`
    pub f_star: T,
    pub source: SaddleSource,
    lagrangian_star: T,
}

impl<T: Scalar> SaddleReference<T> {
    /// Checks the KKT residual and feasibility at `(u, p)` against
    /// [`SADDLE_TOL`].
    pub fn new(
        problem: &LccpProblem<T>,
        u_star: Array1<T>,
        p_star: Array1<T>,
        source: SaddleSource,
    ) -> Result<Self> {
        if u_star.len() != problem.dim_primal() || p_star.len() != problem.dim_dual() {
            return invalid("saddle reference has wrong dimensions");
        }
        let pair = (u_star, p_star);
        let kkt = kkt_residual(problem, &pair);
        let r = problem.constraint_residual(pair.0.view());
        let feas = r.dot(&r).sqrt();
        let tol = T::lit(SADDLE_TOL);
        if !(kkt <= tol && feas <= tol) {
            return invalid(format!(
                "not a saddle point: kkt residual {kkt:e}, feasibility {feas:e}"
            ));
        }
        let lagrangian_star = lagrangian(problem, &pair);
        let f_star = problem.objective(pair.0.view());
        Ok(Self {
            u_star: pair.0,
            p_star: pair.1,
            f_star,
            source,
            lagrangian_star,
        })
    }

    /// `L(u*, p*)`
    pub fn lagrangian_value(&self) -> T {
        self.lagrangian_star
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OracleOptions<T> {
    /// Stopping target for the KKT residual.
    pub tol: T,
    /// Residual above which the run counts as failed; the gap to `tol`
    /// absorbs stalls at the rounding floor.
    pub accept: T,
    pub max_iter: usize,
    /// Augmentation weight; `None` picks `B_G / λ_max(AᵀA)`.
    pub gamma: Option<T>,
    pub safety: T,
    pub kkt_every: usize,
    /// Largest primal dimension accepted.
    pub max_dim: usize,
}

impl<T: Scalar> Default for OracleOptions<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            accept: T::lit(1e-10),
            max_iter: 1_000_000,
            gamma: None,
            safety: T::lit(0.95),
            kkt_every: 10,
            max_dim: 2000,
        }
    }
}

/// Oracle run that missed its tolerance, with the best iterate found.
#[derive(Clone, Debug)]
pub struct OracleFailure<T> {
    pub message: String,
    pub best: Option<Iterate<T>>,
    pub kkt: T,
}

impl<T: Scalar> fmt::Display for OracleFailure<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "saddle oracle failed: {} (kkt residual {:e})", self.message, self.kkt)
    }
}

impl<T: Scalar> std::error::Error for OracleFailure<T> {}

impl<T: Scalar> From<OracleFailure<T>> for Error {
    fn from(f: OracleFailure<T>) -> Self {
        Error::NotConverged(f.to_string())
    }
}

pub fn oracle_saddle<T: Scalar>(
    problem: &LccpProblem<T>,
) -> std::result::Result<SaddleReference<T>, OracleFailure<T>> {
    oracle_saddle_with(problem, &OracleOptions::default())
}

/// Planted solution when the problem carries one, otherwise a tight APP-AL
/// run with the half-squared-norm core.
pub fn oracle_saddle_with<T: Scalar>(
    problem: &LccpProblem<T>,
    options: &OracleOptions<T>,
) -> std::result::Result<SaddleReference<T>, OracleFailure<T>> {
    let fail = |message: String, best: Option<Iterate<T>>, kkt: T| OracleFailure {
        message,
        best,
        kkt,
    };
    if let Some((u, p)) = problem.planted() {
        return SaddleReference::new(problem, u.clone(), p.clone(), SaddleSource::Planted)
            .map_err(|e| fail(e.to_string(), None, T::nan()));
    }
    if problem.dim_primal() > options.max_dim {
        return Err(fail(
            format!(
                "dimension {} exceeds the oracle limit {}",
                problem.dim_primal(),
                options.max_dim
            ),
            None,
            T::nan(),
        ));
    }
    let core = CoreFunction::half_squared_norm();
    let gamma = options.gamma.unwrap_or_else(|| default_gamma(problem));
    let mut params = auto_params(problem, &core, gamma, options.safety)
        .map_err(|e| fail(e.to_string(), None, T::nan()))?;
    params.max_iter = options.max_iter;
    params.tol_kkt = options.tol;
    params.kkt_every = options.kkt_every;

    let solver = AppAl::new(problem, &core, params).map_err(|e| fail(e.to_string(), None, T::nan()))?;
    let init = Iterate::initial(problem, gamma).map_err(|e| fail(e.to_string(), None, T::nan()))?;
    let outcome = solver
        .run(init, TraceRecorder::new(problem).every(0), &mut [])
        .map_err(|f| fail(f.error.to_string(), Some(f.state), T::nan()))?;
    let kkt = kkt_residual(problem, &outcome.state);
    if !(kkt <= options.accept.max(options.tol)) {
        return Err(fail(
            format!("tolerance {:e} not reached in {} iterations", options.accept, outcome.iterations()),
            Some(outcome.state),
            kkt,
        ));
    }
    let (u, p) = outcome.state.clone().into_parts();
    SaddleReference::new(problem, u, p, SaddleSource::OracleRun)
        .map_err(|e| fail(e.to_string(), Some(outcome.state), kkt))
}

fn default_gamma<T: Scalar>(problem: &LccpProblem<T>) -> T {
    let lam = problem.lambda_max_ata();
    let bg = problem.lipschitz_g();
    if lam > T::zero() && bg > T::zero() {
        bg / lam
    } else {
        T::one()
    }
}
