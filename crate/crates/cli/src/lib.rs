//! Experiment harness: configuration, utilization sweeps, controller
//! training and CSV output for the admission-control models in `caclab-core`.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod sweep;

pub use config::{ExperimentConfig, LoadedConfig, Overrides, PolicyKind};
pub use error::CliError;
pub use sweep::{sweep, SweepRow};
