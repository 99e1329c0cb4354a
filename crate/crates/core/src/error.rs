use std::path::PathBuf;

use crate::modring::AdmissibilityMode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: u64, modulus: u64 },

    #[error("no admissible length at or below {0}")]
    NoAdmissibleLength(u64),

    #[error("length {n} is not admissible ({mode} mode)")]
    NotAdmissible { n: u64, mode: AdmissibilityMode },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("problem too large: {what} ({size} exceeds limit {limit})")]
    TooLarge {
        what: &'static str,
        size: u128,
        limit: u128,
    },

    #[error(
        "eigenvector extraction failed: best residual {residual:e} above tolerance {tolerance:e}"
    )]
    EigensolveFailed { residual: f64, tolerance: f64 },

    #[error("infeasible constraint set: {0}")]
    Infeasible(String),

    #[error("unsupported audio format: {0}")]
    UnsupportedFormat(String),

    #[error("file too short: need {needed} samples, have {available}")]
    FileTooShort { needed: usize, available: usize },

    #[error("malformed input {path:?}: {reason}")]
    MalformedInput { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Wav(#[from] hound::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("plot rendering failed: {0}")]
    Plot(String),
}

pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        })
    }
}
