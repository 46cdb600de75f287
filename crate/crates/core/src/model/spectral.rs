use ndarray::{Array1, Array2};

use crate::Scalar;

/// Factor applied to power-iteration estimates before they enter a strict
/// step-size bound, since the estimate may undershoot slightly.
pub const SAFETY_FACTOR: f64 = 1.0 + 1e-6;

const MAX_ITER: usize = 1000;
const REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralEstimate<T> {
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the operator annihilated every start vector (zero matrix).
    pub zero: bool,
}

/// Largest eigenvalue of `AᵀA` by power iteration.
pub fn estimate_spectral_norm<T: Scalar>(a: &Array2<T>) -> SpectralEstimate<T> {
    let est = dominant_psd(a.ncols(), |x| a.t().dot(&a.dot(x)));
    if est.zero {
        log::warn!("spectral norm requested for a zero matrix");
    }
    est
}

/// Largest eigenvalue of a symmetric positive semidefinite matrix.
pub fn largest_eigenvalue_sym<T: Scalar>(q: &Array2<T>) -> SpectralEstimate<T> {
    dominant_psd(q.nrows(), |x| q.dot(x))
}

/// Smallest eigenvalue of a symmetric PSD matrix, from power iteration on
/// the shifted matrix `λ_max I − Q`.
pub fn smallest_eigenvalue_sym<T: Scalar>(q: &Array2<T>) -> SpectralEstimate<T> {
    let top = largest_eigenvalue_sym(q);
    if top.zero {
        return top;
    }
    let shift = top.value;
    let shifted = dominant_psd(q.nrows(), |x| x * shift - q.dot(x));
    SpectralEstimate {
        value: shift - shifted.value,
        iterations: top.iterations + shifted.iterations,
        converged: top.converged && shifted.converged,
        zero: false,
    }
}

// Runs from the all-ones vector and from a fixed irregular vector, keeping
// the larger Rayleigh quotient: the all-ones start is orthogonal to the top
// eigenvector for balanced label vectors such as y = (1, -1).
fn dominant_psd<T, F>(n: usize, apply: F) -> SpectralEstimate<T>
where
    T: Scalar,
    F: Fn(&Array1<T>) -> Array1<T>,
{
    if n == 0 {
        return SpectralEstimate {
            value: T::zero(),
            iterations: 0,
            converged: true,
            zero: true,
        };
    }
    let ones = Array1::from_elem(n, T::one());
    let golden = 0.618_033_988_749_894_9_f64;
    let irregular = Array1::from_iter((0..n).map(|j| {
        let f = ((j as f64 + 1.0) * golden).fract();
        T::lit(f - 0.5 + 1e-3)
    }));
    let a = power_iteration(ones, &apply);
    let b = power_iteration(irregular, &apply);
    let best = if b.value > a.value { b } else { a };
    SpectralEstimate {
        zero: a.zero && b.zero,
        iterations: a.iterations + b.iterations,
        ..best
    }
}

fn power_iteration<T, F>(start: Array1<T>, apply: &F) -> SpectralEstimate<T>
where
    T: Scalar,
    F: Fn(&Array1<T>) -> Array1<T>,
{
    let tol = T::lit(REL_TOL).max(T::epsilon() * T::lit(8.0));
    let norm = start.dot(&start).sqrt();
    let mut x = start / norm;
    let mut prev = T::zero();
    for it in 1..=MAX_ITER {
        let y = apply(&x);
        let rq = x.dot(&y);
        let ny = y.dot(&y).sqrt();
        if ny == T::zero() || !ny.is_finite() {
            return SpectralEstimate {
                value: T::zero(),
                iterations: it,
                converged: true,
                zero: ny == T::zero(),
            };
        }
        if it > 1 && (rq - prev).abs() <= tol * rq.abs() {
            return SpectralEstimate {
                value: rq,
                iterations: it,
                converged: true,
                zero: false,
            };
        }
        prev = rq;
        x = y / ny;
    }
    SpectralEstimate {
        value: prev,
        iterations: MAX_ITER,
        converged: false,
        zero: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use ndarray::array;

    #[test]
    fn label_row_vector() {
        // AᵀA = y yᵀ has the single nonzero eigenvalue ‖y‖² = 2.
        let a = array![[1.0, -1.0]];
        assert_relative_eq!(estimate_spectral_norm(&a).value, 2.0, max_relative = 1e-8);
    }

    #[test]
    fn identity_and_diagonal() {
        let a = Array2::<f64>::eye(3);
        assert_relative_eq!(estimate_spectral_norm(&a).value, 1.0, max_relative = 1e-8);
        let a = array![[3.0, 0.0], [0.0, 4.0]];
        assert_relative_eq!(estimate_spectral_norm(&a).value, 16.0, max_relative = 1e-8);
    }

    #[test]
    fn zero_matrix_flags() {
        let est = estimate_spectral_norm(&Array2::<f64>::zeros((2, 3)));
        assert!(est.zero);
        assert_eq!(est.value, 0.0);
    }

    #[test]
    fn smallest_eigenvalue_of_diagonal() {
        let q = array![[2.0, 0.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 0.5]];
        assert_relative_eq!(smallest_eigenvalue_sym(&q).value, 0.5, max_relative = 1e-8);
        assert_relative_eq!(largest_eigenvalue_sym(&q).value, 5.0, max_relative = 1e-8);
    }

    #[test]
    fn works_in_single_precision() {
        let a = array![[3.0f32, 0.0], [0.0, 4.0]];
        assert!((estimate_spectral_norm(&a).value - 16.0).abs() < 1e-4);
    }
}
