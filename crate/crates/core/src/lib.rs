//! Randomized primal-dual coordinate (RPDC) method for linearly constrained
//! convex programs
//!
//! ```text
//! minimize   G(u) + J(u)
//! subject to A u = b,  u in U = U_1 x ... x U_N
//! ```
//!
//! where `G` is smooth, `J` and `U` are separable over the block partition.
//! Each RPDC iteration samples one block uniformly, takes a linearized
//! Bregman-proximal step on it and then an ascent step on the multipliers.
//!
//! The crate also carries the deterministic APP-AL iteration (whose map
//! `T(w)` drives the analysis), a pairwise random coordinate descent
//! baseline, builders for SVM-dual and l1-portfolio instances, and the
//! diagnostics used to check the convergence theory numerically (KKT
//! residuals, Lyapunov functions, rate fitting, saddle oracle).
//!
//! All numerical code is generic over [`Scalar`]; the aliases at the crate
//! root fix it to `f64` (and `f32` where that is useful).

// Negated comparisons are deliberate: NaN must fail every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Run failures carry the partial trace and state by value.
#![allow(clippy::result_large_err)]

pub mod baselines;
pub mod dataio;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod problems;
pub mod proximal;
pub mod runner;
pub mod scalar;
pub mod solver;

#[cfg(test)]
pub(crate) mod testkit;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use baselines::{AppAl, Rcd, RcdParams};
pub use diagnostics::{
    fit_linear_rate, kkt_residual, oracle_saddle, LyapunovConstants, OracleOptions, RateFit,
    RunMetadata, RunTrace, SaddleReference, SaddleSource, TraceRecord, TraceRecorder,
};
pub use model::{
    bregman_distance, estimate_spectral_norm, slice_block, BlockPartition, BlockProx,
    CoreFunction, LccpProblem, QuadraticTerm, SmoothTerm,
};
pub use problems::{build_mlp, build_svm, build_synthetic, MlpInstance, SvmInstance, SyntheticSpec};
pub use proximal::{box_clip, soft_threshold, SeparableTerm};
pub use runner::{Callback, RunFailure, RunOutcome, StopReason};
pub use solver::{auto_params, validate_params, Iterate, ParamReport, Rpdc, SolverParams, SolverRng};

/// Double-precision problem.
pub type Problem = LccpProblem<f64>;
/// Single-precision problem.
pub type ProblemF32 = LccpProblem<f32>;
/// Double-precision primal-dual state.
pub type State = Iterate<f64>;
/// Double-precision solver parameters.
pub type Params = SolverParams<f64>;
/// Double-precision core function.
pub type Core = CoreFunction<f64>;
/// Double-precision run trace.
pub type Trace = RunTrace<f64>;
/// Double-precision saddle reference.
pub type Saddle = SaddleReference<f64>;
