//! Pipeline commands behind the `sonobeam` binary: simulate, beamform,
//! metrics, render and profile, plus the on-disk RF and image containers.

pub mod commands;
pub mod config;
pub mod container;
mod error;

pub use error::{CliError, CliResult};
