//! Configuration and subcommands of the `momentot` command-line tool.

pub mod commands;
pub mod config;

pub use commands::{run, Command, Failure, Overrides};
pub use config::RunConfig;
