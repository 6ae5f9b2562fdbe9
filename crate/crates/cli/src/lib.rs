//! Batch driver for thermal-state anneals: configuration, parameter scans on a
//! worker pool, and CSV output.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{ModelConfig, ModelName, RunConfig};
pub use error::CliError;
