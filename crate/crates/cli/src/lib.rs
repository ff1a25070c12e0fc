//! Command-line front end for heights of motives: the JSON document format,
//! builder examples, and the `validate`, `height`, `local`, `invariants`,
//! `experiment`, `batch` and `example` commands.
//!
//! Exit codes: 0 success, 1 validation failure, 2 precision exhausted,
//! 3 malformed input.

pub mod cli;
pub mod commands;
pub mod document;
pub mod error;
pub mod examples;
pub mod render;

pub use cli::run;
pub use commands::{Outcome, Settings};
pub use error::CliError;
