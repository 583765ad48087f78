use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter is outside its admissible range. `field` is the flag or
    /// struct field name, so messages read like "alpha0 must lie in [0,1]".
    #[error("{field} {reason}")]
    Validation { field: &'static str, reason: String },

    /// A tabulated policy was queried at a fraction that is not on its grid.
    #[error("fraction {fraction} is not a point of the {count}-arm grid")]
    OffGrid { fraction: f64, count: usize },

    /// Caller bug: empty score vector, arm index out of range and the like.
    #[error("{0}")]
    Usage(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 2 for bad input, 3 for I/O and
    /// serialization failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation { .. } | Error::OffGrid { .. } | Error::Usage(_) => 2,
            Error::Io { .. } | Error::Csv(_) | Error::Json(_) => 3,
        }
    }
}
