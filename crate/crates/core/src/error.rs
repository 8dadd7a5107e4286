use std::path::PathBuf;

use thiserror::Error;

use crate::access::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(#[from] Violation),

    #[error(
        "infeasible: required primary rate {required} bits/s exceeds the achievable maximum \
         {achievable} bits/s (secondary silent in every state)"
    )]
    Infeasible { required: f64, achievable: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("solver post-check failed: {0}")]
    PostCheck(String),

    #[error("missing input files: {}", list_paths(.0))]
    MissingInputs(Vec<PathBuf>),

    #[error("I/O error at {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::InvalidArgument(_) | Error::InvalidAllocation(_) => 2,
            Error::Infeasible { .. } => 3,
            Error::Io { .. } | Error::MissingInputs(_) => 4,
            Error::PostCheck(_) => 5,
        }
    }
}

fn list_paths(paths: &[PathBuf]) -> String {
    let shown: Vec<String> = paths.iter().map(|p| p.display().to_string()).collect();
    shown.join(", ")
}

pub(crate) fn ensure_finite_nonneg(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must be finite and >= 0, got {value}"
        )))
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!(
            "{name} must be finite and > 0, got {value}"
        )))
    }
}
