//! Problem model: block partition, core (Bregman) functions, the LCCP
//! instance and the spectral estimates its step-size window needs.

mod core_fn;
mod partition;
mod problem;
mod spectral;

pub use core_fn::{bregman_distance, CoreFunction, CoreKind};
pub use partition::{slice_block, write_block, BlockPartition};
pub use problem::{BlockProx, LccpProblem, ProblemMeta, QuadraticTerm, SmoothTerm};
pub use spectral::{
    estimate_spectral_norm, largest_eigenvalue_sym, smallest_eigenvalue_sym, SpectralEstimate,
    SAFETY_FACTOR,
};
