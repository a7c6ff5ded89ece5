//! Error type shared by every module of the crate.

use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range for {what} of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: String, actual: String },

    #[error("time-ordered split requested but the graph carries no timestamps")]
    MissingTimestamps,

    #[error("unknown node label {0:?}")]
    UnknownLabel(String),

    #[error("matrix is not symmetric")]
    Asymmetric,

    #[error("no convergence after {iterations} iterations (worst residual {worst:.3e})")]
    NotConverged {
        iterations: usize,
        worst: f64,
        residuals: Vec<f64>,
    },

    #[error("pole violated: |alpha * sigma| = {0} must stay below 1")]
    Pole(f64),

    #[error("overflow guard: |alpha * sigma| = {0} exceeds 700")]
    Overflow(f64),

    #[error("{family} is not a valid bipartite predictor")]
    UnsupportedTransform { family: &'static str },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate fitting problem: {0}")]
    Degenerate(String),
}

impl Error {
    /// Numerical failures (exit code 2 at the command line) as opposed to
    /// bad input (exit code 1).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotConverged { .. }
                | Error::Pole(_)
                | Error::Overflow(_)
                | Error::Degenerate(_)
                | Error::InsufficientData(_)
        )
    }

    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        Error::InvalidArgument(message.into())
    }
}
