//! Uncertainty-aware resource provisioning for network slices.
//!
//! Slices carry a random number of users with Gaussian per-user demand. Their
//! chance constraints are turned into deterministic targets by calibrated
//! robustness margins, and provisioning is solved as a mixed-integer linear
//! program, jointly or slice by slice, optionally reserving capacity for
//! best-effort background traffic.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cli;
pub mod demand;
pub mod error;
pub mod eval;
pub mod linalg;
pub mod optimizer;
pub mod planner;
pub mod probability;
pub mod solver;
pub mod topology;

pub use error::{Error, Result};
