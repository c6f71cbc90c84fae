//! Command-line front end for `qmetro`: classification, channel QFI,
//! extension bounds, protocol sweeps and the strategy comparison table.

pub mod commands;
pub mod config;
pub mod error;

pub use config::ExperimentConfig;
pub use error::{CliError, Result};
