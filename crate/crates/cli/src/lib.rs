//! Scenario handling and the subcommands behind the `pla-delay` binary.
pub mod commands;
pub mod config;
pub mod error;

pub use commands::{Outcome, RunOptions, Table};
pub use config::{ScenarioFile, Sweep};
pub use error::{CliError, ErrorRecord, Result};
