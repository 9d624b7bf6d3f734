//! File formats, ingest, report emission and the command implementations
//! behind the `mrio` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod layout;
pub mod report;
pub mod tables;

pub use error::{CliError, Result};
