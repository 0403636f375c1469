//! Command-line harness: datasets, partitions, metrics, experiments and
//! cost benchmarks around the federation.

pub mod bench;
pub mod commands;
pub mod config;
pub mod dataset;
mod error;
pub mod experiment;
pub mod metrics;
pub mod partition;
pub mod synth;

pub use error::{CliError, Result};
