//! Realized volatility measures, HAR-family regressions with jump and
//! leverage blocks, rolling forecasts and forecast comparison.

// `!(x > 0.0)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod estimation;
pub mod evaluation;
pub mod features;
pub mod forecast;
pub mod ingest;
pub mod measures;
pub mod models;
pub mod simulator;
pub mod stats;

pub use error::{Error, Result};
