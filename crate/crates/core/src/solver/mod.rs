//! The RPDC iteration: random block selection, linearized Bregman primal
//! step on that block, dual ascent with step `ρ`.

mod iterate;
mod params;
mod rpdc;

pub use iterate::Iterate;
pub use params::{auto_params, validate_params, ParamReport, ParamViolation, ParamWindow, SolverParams};
pub use rpdc::{enumerate_block_expectation, solver_rng, BlockExpectation, Rpdc, SolverRng, ENUMERATION_CAP};

pub(crate) use params::validate_primal;
pub(crate) use rpdc::primal_block_update;
