//! Experiment harness: configuration, sweeps, demo inpainting, and the
//! CSV/SVG/PGM emitters behind the `inpaint` binary.

pub mod config;
pub mod demo;
pub mod plot;
pub mod sweep;

pub use config::{CliError, CliResult, Config};
