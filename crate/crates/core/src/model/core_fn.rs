use ndarray::{Array1, Array2, ArrayView1};

use super::spectral::{largest_eigenvalue_sym, smallest_eigenvalue_sym};
use crate::error::{invalid, Result};
use crate::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub enum CoreKind<T> {
    /// `K(u) = ½‖u‖²`
    HalfSquaredNorm,
    /// `K(u) = ½ uᵀQu` with `Q` symmetric positive definite.
    Quadratic(Array2<T>),
}

/// Core function `K` inducing the Bregman distance
/// `D(u, v) = K(u) − K(v) − ⟨∇K(v), u − v⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoreFunction<T> {
    kind: CoreKind<T>,
    strong_convexity: T,
    gradient_lipschitz: T,
    diagonal: Option<Array1<T>>,
}

impl<T: Scalar> CoreFunction<T> {
    pub fn half_squared_norm() -> Self {
        Self {
            kind: CoreKind::HalfSquaredNorm,
            strong_convexity: T::one(),
            gradient_lipschitz: T::one(),
            diagonal: None,
        }
    }

    /// Quadratic core; `β` and `B` are the extreme eigenvalues of `Q`
    /// (exact for diagonal `Q`, power iteration otherwise).
    pub fn quadratic(q: Array2<T>) -> Result<Self> {
        let n = q.nrows();
        if n == 0 || q.ncols() != n {
            return invalid("core matrix must be square and non-empty");
        }
        let tol = T::lit(1e-10);
        for i in 0..n {
            for j in 0..i {
                if (q[[i, j]] - q[[j, i]]).abs() > tol {
                    return invalid("core matrix must be symmetric");
                }
            }
        }
        let is_diag = (0..n).all(|i| (0..n).all(|j| i == j || q[[i, j]] == T::zero()));
        let (beta, lip, diagonal) = if is_diag {
            let d = q.diag().to_owned();
            let lo = d.iter().copied().fold(T::infinity(), T::min);
            let hi = d.iter().copied().fold(T::neg_infinity(), T::max);
            (lo, hi, Some(d))
        } else {
            (
                smallest_eigenvalue_sym(&q).value,
                largest_eigenvalue_sym(&q).value,
                None,
            )
        };
        if !(beta > T::zero()) {
            return invalid("core matrix must be positive definite");
        }
        Ok(Self {
            kind: CoreKind::Quadratic(q),
            strong_convexity: beta,
            gradient_lipschitz: lip.max(beta),
            diagonal,
        })
    }

    pub fn kind(&self) -> &CoreKind<T> {
        &self.kind
    }

    /// Strong convexity modulus `β`.
    pub fn beta(&self) -> T {
        self.strong_convexity
    }

    /// Gradient Lipschitz constant `B`.
    pub fn lipschitz(&self) -> T {
        self.gradient_lipschitz
    }

    /// Diagonal of `Q` when the core is a diagonal quadratic.
    pub fn diagonal(&self) -> Option<ArrayView1<'_, T>> {
        self.diagonal.as_ref().map(|d| d.view())
    }

    /// Whether the block subproblem reduces to a (scaled) proximal step.
    pub fn is_separable(&self) -> bool {
        matches!(self.kind, CoreKind::HalfSquaredNorm) || self.diagonal.is_some()
    }

    pub fn distance(&self, u: ArrayView1<'_, T>, v: ArrayView1<'_, T>) -> Result<T> {
        if u.len() != v.len() {
            return invalid(format!(
                "bregman distance of vectors with lengths {} and {}",
                u.len(),
                v.len()
            ));
        }
        let d = &u - &v;
        let half = T::lit(0.5);
        let value = match &self.kind {
            CoreKind::HalfSquaredNorm => half * d.dot(&d),
            CoreKind::Quadratic(q) => {
                if q.nrows() != d.len() {
                    return invalid("core matrix dimension does not match vectors");
                }
                half * d.dot(&q.dot(&d))
            }
        };
        Ok(value.max(T::zero()))
    }
}

pub fn bregman_distance<T: Scalar>(
    core: &CoreFunction<T>,
    u: ArrayView1<'_, T>,
    v: ArrayView1<'_, T>,
) -> Result<T> {
    core.distance(u, v)
}
