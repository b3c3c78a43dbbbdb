//! Command-line pipeline over the `movepat` library.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod profile;

pub use cli::{run, Cli};
pub use config::PipelineConfig;
pub use error::CliError;
