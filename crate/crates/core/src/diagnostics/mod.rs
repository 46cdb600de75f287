//! Analysis quantities: KKT residual, Lagrangians, Lyapunov functions and
//! their constants, averaged iterates, rate fitting, and the saddle oracle.

mod averages;
mod kkt;
mod lyapunov;
mod oracle;
mod rate;
mod trace;

use ndarray::{Array1, ArrayView1};

use crate::solver::Iterate;
use crate::Scalar;

pub use averages::{averaged_iterates, AverageFeasibility, IterateAverager};
pub use kkt::{kkt_residual, lagrangian, lagrangian_aug};
pub use lyapunov::{
    constants, estimate_d5, lemma2_descent_check, lyapunov_lambda, lyapunov_phi,
    LyapunovConstants,
};
pub use oracle::{
    oracle_saddle, oracle_saddle_with, OracleFailure, OracleOptions, SaddleReference,
    SaddleSource, SADDLE_TOL,
};
pub use rate::{fit_linear_rate, fit_power_law, fit_trace_rate, least_squares_line, LineFit, RateFit, PHI_FLOOR};
pub use trace::{Metrics, RunMetadata, RunTrace, TraceRecord, TraceRecorder, TRACE_HEADER};

/// Anything that carries a primal-dual pair `w = (u, p)`.
pub trait PrimalDual<T> {
    fn primal(&self) -> ArrayView1<'_, T>;
    fn dual(&self) -> ArrayView1<'_, T>;
}

impl<T: Scalar> PrimalDual<T> for Iterate<T> {
    fn primal(&self) -> ArrayView1<'_, T> {
        self.u()
    }
    fn dual(&self) -> ArrayView1<'_, T> {
        self.p()
    }
}

impl<T: Scalar> PrimalDual<T> for SaddleReference<T> {
    fn primal(&self) -> ArrayView1<'_, T> {
        self.u_star.view()
    }
    fn dual(&self) -> ArrayView1<'_, T> {
        self.p_star.view()
    }
}

impl<T: Scalar> PrimalDual<T> for (Array1<T>, Array1<T>) {
    fn primal(&self) -> ArrayView1<'_, T> {
        self.0.view()
    }
    fn dual(&self) -> ArrayView1<'_, T> {
        self.1.view()
    }
}

pub(crate) fn sq_dist<T: Scalar>(a: ArrayView1<'_, T>, b: ArrayView1<'_, T>) -> T {
    a.iter().zip(b.iter()).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

/// `‖w − w'‖²` over the stacked pair.
pub fn sq_distance<T: Scalar>(w: &impl PrimalDual<T>, other: &impl PrimalDual<T>) -> T {
    sq_dist(w.primal(), other.primal()) + sq_dist(w.dual(), other.dual())
}
