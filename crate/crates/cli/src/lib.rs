//! Front end for the `treelink` binary: experiment files, CSV output and the
//! subcommands.

pub mod commands;
pub mod config;
pub mod csv;
mod error;
pub mod plot;

pub use commands::{run, Command, Report};
pub use config::ExperimentSpec;
pub use error::CliError;
