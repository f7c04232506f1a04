//! Goodness-of-fit tests for ergodic diffusion processes observed on a
//! uniform time grid.

// NaN-rejecting guards are written as negated comparisons on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod calibration;
pub mod commands;
pub mod config;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod limits;
pub mod model;
pub mod numeric;
pub mod simulate;
pub mod statistics;

pub use error::{Error, Result};
