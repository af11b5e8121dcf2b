//! Library side of the `cvtele` command-line tool.

pub mod commands;
pub mod document;
pub mod error;

pub use error::CliError;
