//! Command-line surface of `mogen-core`: ingestion, centralities, the
//! prediction experiment and smell detection, with reproducible file outputs.
//!
//! Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

pub mod args;
pub mod commands;
pub mod duration;
pub mod error;
pub mod meta;

pub use args::Cli;
pub use error::CliError;
