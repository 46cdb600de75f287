//! Instance builders: SVM dual, ℓ1-regularized portfolio, and synthetic
//! programs with a planted saddle point.

mod mlp;
mod svm;
mod synthetic;

pub use mlp::{build_mlp, MlpInstance};
pub use svm::{build_svm, SvmInstance};
pub use synthetic::{build_synthetic, SyntheticSpec};

use ndarray::Array2;

use crate::model::ProblemMeta;
use crate::Scalar;

/// Eigenvalue floor below which a Hessian is treated as singular.
pub const PD_FLOOR: f64 = 1e-8;
/// Diagonal shift applied to a Hessian that fails the floor.
pub const PD_JITTER: f64 = 1e-6;

pub(crate) const SYMMETRY_TOL: f64 = 1e-10;

pub(crate) fn check_symmetric<T: Scalar>(q: &Array2<T>, what: &str) -> crate::Result<()> {
    let n = q.nrows();
    if q.ncols() != n {
        return crate::error::invalid(format!("{what} must be square, got {n}x{}", q.ncols()));
    }
    for i in 0..n {
        for j in 0..i {
            if (q[[i, j]] - q[[j, i]]).abs() > T::lit(SYMMETRY_TOL) {
                return crate::error::invalid(format!("{what} is not symmetric at ({i}, {j})"));
            }
        }
    }
    Ok(())
}

/// Whether `Q − floor·I` admits a Cholesky factorization, i.e. whether
/// `λ_min(Q) > floor` for symmetric `Q`.
pub(crate) fn exceeds_floor<T: Scalar>(q: &Array2<T>, floor: T) -> bool {
    let n = q.nrows();
    let mut l = Array2::<T>::zeros((n, n));
    for j in 0..n {
        let mut d = q[[j, j]] - floor;
        for k in 0..j {
            d -= l[[j, k]] * l[[j, k]];
        }
        if !(d > T::zero()) {
            return false;
        }
        let d = d.sqrt();
        l[[j, j]] = d;
        for i in j + 1..n {
            let mut s = q[[i, j]];
            for k in 0..j {
                s -= l[[i, k]] * l[[j, k]];
            }
            l[[i, j]] = s / d;
        }
    }
    true
}

/// Adds [`PD_JITTER`]`·I` when `λ_min(Q) ≤` [`PD_FLOOR`], recording it.
pub(crate) fn regularize<T: Scalar>(mut q: Array2<T>, meta: &mut ProblemMeta) -> Array2<T> {
    if !exceeds_floor(&q, T::lit(PD_FLOOR)) {
        let jitter = T::lit(PD_JITTER);
        q.diag_mut().mapv_inplace(|d| d + jitter);
        meta.jitter = Some(PD_JITTER);
        log::info!("hessian smallest eigenvalue at or below {PD_FLOOR:e}; added {PD_JITTER:e} I");
    }
    q
}
