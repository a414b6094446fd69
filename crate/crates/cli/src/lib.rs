//! Scenario files, runners and exports behind the `dicke-rap` binary.

pub mod config;
pub mod error;
pub mod export;
pub mod runner;

pub use error::{CliError, Result};
