//! Small instances shared by unit tests.

use ndarray::{array, Array1, Array2};
use rand::Rng;

use crate::problems::{build_mlp, build_svm, MlpInstance, SvmInstance};
use crate::solver::solver_rng;
use crate::LccpProblem;

/// `min ½‖u‖² − 1ᵀu  s.t.  u₁ − u₂ = 0, u ∈ [0, 1]²`; saddle `(1, 1), p = 0`.
pub fn toy_svm(blocks: usize) -> LccpProblem<f64> {
    build_svm(
        &SvmInstance {
            q: Array2::eye(2),
            y: array![1.0, -1.0],
            c: 1.0,
        },
        blocks,
    )
    .unwrap()
}

/// `Σ = I`, `μ = (0.1, 0.2)`, target `0.15`; for `λ = 0` the saddle is
/// `u = (0.5, 0.5)`, `p = (0, −0.5)`.
pub fn toy_mlp(lambda: f64, blocks: usize) -> LccpProblem<f64> {
    build_mlp(
        &MlpInstance {
            sigma: Array2::eye(2),
            mu: array![0.1, 0.2],
            target: 0.15,
            lambda,
        },
        blocks,
    )
    .unwrap()
}

pub fn random_vec(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> Array1<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

/// Random SPD matrix `MᵀM/n + I`.
pub fn random_spd(seed: u64, n: usize) -> Array2<f64> {
    let mut rng = solver_rng(seed);
    let m = Array2::from_shape_fn((n, n), |_| rng.random_range(-1.0..1.0));
    m.t().dot(&m) / n as f64 + Array2::<f64>::eye(n)
}
