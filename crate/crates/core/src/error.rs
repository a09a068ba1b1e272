use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by estimators, the simulation harness and data ingestion.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    /// MAD evaluated to zero without the majority-identical rule applying.
    #[error("degenerate residual scale (MAD = 0) for coefficients {beta:?}")]
    DegenerateScale { beta: Vec<f64> },

    #[error("no pair of rows differs in any predictor; candidate coefficients cannot be built")]
    UnsampleableDesign,

    #[error("all {candidates} candidate coefficient vectors were skipped (tied or degenerate)")]
    AllCandidatesDegenerate { candidates: usize },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("{method} failed on {failed} of {total} replications (limit 1%)")]
    TooManyFailures {
        method: String,
        failed: usize,
        total: usize,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numerical content of the data rather
    /// than by the way the caller set things up.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateScale { .. }
                | Error::UnsampleableDesign
                | Error::AllCandidatesDegenerate { .. }
                | Error::DegenerateDesign(_)
                | Error::TooManyFailures { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
