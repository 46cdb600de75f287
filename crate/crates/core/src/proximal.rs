//! Closed-form proximal maps and projections.

use ndarray::{Array1, ArrayView1, Zip};

use crate::error::{invalid, Result};
use crate::model::BlockProx;
use crate::Scalar;

/// Componentwise projection onto `[lo, hi]`.
pub fn box_clip<T: Scalar>(v: ArrayView1<'_, T>, lo: T, hi: T) -> Result<Array1<T>> {
    if !(lo <= hi) {
        return invalid(format!("empty box [{lo}, {hi}]"));
    }
    Ok(v.mapv(|x| clip(x, lo, hi)))
}

/// Componentwise `sign(v)·max(0, |v| − τ)`; entries with `|v| = τ` map to 0.
pub fn soft_threshold<T: Scalar>(v: ArrayView1<'_, T>, tau: T) -> Result<Array1<T>> {
    if !(tau >= T::zero()) {
        return invalid(format!("soft threshold must be nonnegative, got {tau}"));
    }
    Ok(v.mapv(|x| shrink(x, tau)))
}

#[inline]
pub(crate) fn clip<T: Scalar>(x: T, lo: T, hi: T) -> T {
    x.max(lo).min(hi)
}

#[inline]
pub(crate) fn shrink<T: Scalar>(x: T, tau: T) -> T {
    let mag = x.abs() - tau;
    if mag > T::zero() {
        mag.copysign(x)
    } else {
        T::zero()
    }
}

/// The coordinate-separable nonsmooth terms used by the shipped problems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeparableTerm<T> {
    /// `J = 0`, `U = ℝⁿ`.
    Free,
    /// `J = 0`, `U = [lo, hi]ⁿ`.
    Box { lo: T, hi: T },
    /// `J = weight·‖u‖₁`, `U = ℝⁿ`.
    L1 { weight: T },
}

impl<T: Scalar> SeparableTerm<T> {
    fn prox_scalar(&self, x: T, step: T) -> T {
        match *self {
            SeparableTerm::Free => x,
            SeparableTerm::Box { lo, hi } => clip(x, lo, hi),
            SeparableTerm::L1 { weight } => shrink(x, weight * step),
        }
    }
}

impl<T: Scalar> BlockProx<T> for SeparableTerm<T> {
    fn block_value(&self, _block: usize, u: ArrayView1<'_, T>) -> T {
        match *self {
            SeparableTerm::Free | SeparableTerm::Box { .. } => T::zero(),
            SeparableTerm::L1 { weight } => weight * u.iter().map(|x| x.abs()).sum::<T>(),
        }
    }

    fn block_prox(&self, _block: usize, v: ArrayView1<'_, T>, step: T) -> Result<Array1<T>> {
        match *self {
            SeparableTerm::Free => Ok(v.to_owned()),
            SeparableTerm::Box { lo, hi } => box_clip(v, lo, hi),
            SeparableTerm::L1 { weight } => soft_threshold(v, weight * step),
        }
    }

    fn block_prox_scaled(
        &self,
        _block: usize,
        v: ArrayView1<'_, T>,
        steps: ArrayView1<'_, T>,
    ) -> Result<Array1<T>> {
        if v.len() != steps.len() {
            return invalid("prox steps and input differ in length");
        }
        Ok(Zip::from(&v)
            .and(&steps)
            .map_collect(|&x, &s| self.prox_scalar(x, s)))
    }

    fn block_contains(&self, _block: usize, u: ArrayView1<'_, T>) -> bool {
        match *self {
            SeparableTerm::Box { lo, hi } => u.iter().all(|&x| lo <= x && x <= hi),
            _ => u.iter().all(|x| x.is_finite()),
        }
    }

    fn box_bounds(&self) -> Option<(T, T)> {
        match *self {
            SeparableTerm::Free => Some((T::neg_infinity(), T::infinity())),
            SeparableTerm::Box { lo, hi } => Some((lo, hi)),
            SeparableTerm::L1 { .. } => None,
        }
    }

    fn describe(&self) -> String {
        match self {
            SeparableTerm::Free => "free".into(),
            SeparableTerm::Box { lo, hi } => format!("box[{lo},{hi}]"),
            SeparableTerm::L1 { weight } => format!("l1[{weight}]"),
        }
    }
}
