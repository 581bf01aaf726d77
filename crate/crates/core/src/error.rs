use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// The supply and demand curves do not cross at a finite price.
    #[error("failed auction: {0}")]
    FailedAuction(String),

    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid order: {0}")]
    InvalidOrder(String),

    #[error("insufficient tail data: {found} points in window, need at least {needed}")]
    InsufficientTailData { found: usize, needed: usize },

    #[error("non-positive value {0} inside a log-log fit window")]
    NonPositiveValues(f64),

    #[error("degenerate sample: {0}")]
    DegenerateSample(String),

    #[error("group {0} has zero variance")]
    ZeroVariance(usize),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("no trades in reference window")]
    NoTradesInWindow,

    #[error("counts resampling failed after {0} attempts (pmf concentrated on N_A = N_B)")]
    ResamplingExhausted(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 usage, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_) | Error::Config(_) => 2,
            Error::DegenerateSample(_) | Error::ResamplingExhausted(_) => 4,
            _ => 3,
        }
    }
}
