//! Command-line front end for `modfrm`: design files, sweeps, responses,
//! channelizer presets and a signal harness.

pub mod channelize;
pub mod commands;
pub mod designfile;
mod error;
pub mod freq;
pub mod presets;

pub use error::{CliError, CliResult};
