//! Command-line front end for `boxdeconv`: file formats, configuration,
//! the phase-transition harness and the `boxdeconv` binary's subcommands.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod phase;
pub mod synth;

pub use error::{CliError, CliResult};
