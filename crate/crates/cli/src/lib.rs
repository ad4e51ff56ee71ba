//! File handling and subcommands behind the `mor` binary.

pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod format;
pub mod selftest;

pub use error::{CliError, CliResult};
