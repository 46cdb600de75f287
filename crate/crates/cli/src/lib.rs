//! Experiment runner behind the `rpdc` binary: seeded batches, block-count
//! sweeps and algorithm comparisons, written as CSV traces plus SVG plots.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod instance;
pub mod plot;
pub mod run;
