//! Comparison methods: the deterministic APP-AL iteration (also the map
//! `T(w)` used in the analysis) and pairwise random coordinate descent for
//! singly-constrained box QPs.

mod appal;
mod rcd;

pub use appal::{appal_step, AppAl};
pub use rcd::{Rcd, RcdParams};
