//! Configuration-driven runs of the V-soliton solver and its verification
//! suites.

pub mod commands;
pub mod config;
pub mod expr;
pub mod report;
pub mod suites;

pub use commands::{execute, load, CliError, Command, Outcome, Overrides};
pub use config::{ConfigError, RunConfig, Suite};
