//! Experiment harness for the `geomopt` command.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod synth;

pub use config::{EtaPolicy, Experiment, ExperimentConfig, RawConfig};
pub use error::{CliError, CliResult};
