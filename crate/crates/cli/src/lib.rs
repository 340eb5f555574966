//! Command-line experiments over the Poisson line Cox process toolkit.

pub mod config;
pub mod run;
pub mod svg;

pub use config::{parse_config, ConfigError, Experiment, ExperimentConfig, RawConfig};
pub use run::{replay, run, Outcome, RunError};
