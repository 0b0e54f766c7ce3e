//! Library half of the `oppspec` command-line tool: configuration, file
//! formats, report emission and the command workflows.

// `!(x > 0.0)` is the NaN-rejecting guard used throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::{Path, PathBuf};

use thiserror::Error;

use oppspec_core::occupancy::{FitError, GofError};
use oppspec_core::{AnalyticsError, LinkError, OccupancyError, SensingError, SimError};

pub mod commands;
pub mod config;
pub mod formats;
pub mod report;

pub use commands::{run, Command};
pub use config::RunConfig;
pub use report::Report;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}:{line}: {message}", path.display())]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error(transparent)]
    Occupancy(#[from] OccupancyError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Gof(#[from] GofError),
    #[error(transparent)]
    Sensing(#[from] SensingError),
    #[error(transparent)]
    Link(#[from] LinkError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

impl CliError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Short stable tag for the error record.
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Io { .. } => "io",
            CliError::Parse { .. } => "parse",
            CliError::InsufficientData(_) => "insufficient_data",
            CliError::Occupancy(_) => "occupancy",
            CliError::Fit(_) => "fit",
            CliError::Gof(_) => "goodness_of_fit",
            CliError::Sensing(_) => "sensing",
            CliError::Link(_) => "linkbudget",
            CliError::Analytics(_) => "analytics",
            CliError::Sim(_) => "simkernel",
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        let mut v = serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
        });
        if let CliError::Parse { path, line, .. } = self {
            v["path"] = path.display().to_string().into();
            v["line"] = (*line).into();
        }
        if let CliError::Io { path, .. } = self {
            v["path"] = path.display().to_string().into();
        }
        v.to_string()
    }
}
