//! Experiment harness for `alsim-core`: spec files, dataset I/O, runs,
//! sweeps and plot-ready CSV output.

pub mod commands;
pub mod error;
pub mod io;
pub mod spec;

pub use error::{CliError, CliResult};
