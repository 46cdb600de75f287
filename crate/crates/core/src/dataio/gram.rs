use ndarray::{Array2, ArrayView1};

use super::LibsvmDataset;
use crate::error::{invalid, Result};
use crate::Scalar;

/// `exp(−‖x − y‖² / (2σ²))`
pub fn rbf_kernel<T: Scalar>(x: ArrayView1<'_, T>, y: ArrayView1<'_, T>, sigma: T) -> T {
    let sq: T = x.iter().zip(y.iter()).map(|(&a, &b)| (a - b) * (a - b)).sum();
    (-sq / (T::lit(2.0) * sigma * sigma)).exp()
}

/// RBF Gram matrix over the rows of `data`, optionally label-folded to
/// `Q_ij = y_i y_j K_ij`. Each pair is evaluated once, so the result is
/// exactly symmetric. No jitter is applied here; the SVM builder owns the
/// positive-definiteness rule.
pub fn rbf_gram<T: Scalar>(data: &LibsvmDataset<T>, sigma: T, fold_labels: bool) -> Result<Array2<T>> {
    if !(sigma > T::zero()) || !sigma.is_finite() {
        return invalid(format!("bandwidth must be positive and finite, got {sigma}"));
    }
    let n = data.n();
    let x = &data.features;
    let mut q = Array2::zeros((n, n));
    for i in 0..n {
        q[[i, i]] = T::one();
        for j in 0..i {
            let mut k = rbf_kernel(x.row(i), x.row(j), sigma);
            if fold_labels {
                k *= data.labels[i] * data.labels[j];
            }
            q[[i, j]] = k;
            q[[j, i]] = k;
        }
    }
    Ok(q)
}

/// Median pairwise Euclidean distance between distinct rows; falls back to
/// 1 when all rows coincide.
pub fn median_bandwidth<T: Scalar>(data: &LibsvmDataset<T>) -> T {
    let x = &data.features;
    let n = data.n();
    let mut dists = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in 0..i {
            let sq: T = x
                .row(i)
                .iter()
                .zip(x.row(j).iter())
                .map(|(&a, &b)| (a - b) * (a - b))
                .sum();
            dists.push(sq.sqrt());
        }
    }
    if dists.is_empty() {
        return T::one();
    }
    let mid = dists.len() / 2;
    let (_, &mut median, _) = dists.select_nth_unstable_by(mid, |a, b| a.partial_cmp(b).expect("finite"));
    if median > T::zero() {
        median
    } else {
        T::one()
    }
}
