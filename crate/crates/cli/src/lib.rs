//! Experiment runner for mismatched scalar quantization: TOML-configured
//! sweeps written as CSV, plus one-off distortion reports.

pub mod config;
pub mod error;
pub mod experiments;
pub mod law;

pub use config::{parse_bits, Experiment, ExperimentConfig, Overrides};
pub use error::CliError;
pub use experiments::{run, Table};
pub use law::parse_law;
