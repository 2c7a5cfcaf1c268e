//! Config parsing, subcommand dispatch and output writers for the `zeno`
//! binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{dispatch, Command};
pub use config::{parse_config, Format, RunConfig};
pub use error::{CliError, Result};
