//! Library side of the `desitter` command-line tool: chart files, summary
//! CSV, thresholds and the subcommands.

// comparisons are negated on purpose so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chartfile;
pub mod commands;
pub mod config;
pub mod error;
pub mod summary;

pub use chartfile::ChartFile;
pub use commands::{run, Cli};
pub use error::{exit, CliError};
