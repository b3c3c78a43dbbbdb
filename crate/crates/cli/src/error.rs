use std::path::PathBuf;

use movepat::{ClusterError, DataError, DistanceError, EvalError, FeatureError, FormatError};
use thiserror::Error;

/// Failures mapped to process exit codes: 1 usage/config, 2 data, 3 degenerate under `--strict`.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("missing prerequisite {}: run `{command}` first", .path.display())]
    Missing { path: PathBuf, command: &'static str },
    #[error("metadata and assignment disagree: {0}")]
    Mismatch(String),
    #[error("stale artifact: {0}")]
    Stale(String),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Distance(#[from] DistanceError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("degenerate computation: {0}")]
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 1,
            CliError::Degenerate(_) => 3,
            _ => 2,
        }
    }

    /// The message without the category prefix.
    pub fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Config(m) => m.clone(),
            other => other.to_string(),
        }
    }
}
