use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or argument value violates its precondition.
    #[error("invalid `{field}`: {reason}")]
    Invalid { field: &'static str, reason: String },

    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("linear solve residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    SolveResidual { residual: f64, tol: f64 },

    #[error("non-finite value in time slice {step}")]
    NonFinite { step: usize },

    #[error("Mittag-Leffler series did not reach tolerance within {max_terms} terms (z = {z})")]
    SeriesNotConverged { z: f64, max_terms: usize },

    #[error("power iteration collapsed to zero at iteration {iter}")]
    Breakdown { iter: usize },

    #[error("stopping test has a zero denominator at iteration {iter}")]
    DegenerateIterate { iter: usize },

    #[error("unknown experiment id `{0}`")]
    UnknownExperiment(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

/// Coarse failure class, shared by the CLI exit status and the C error codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(i32)]
pub enum ErrorKind {
    Validation = 1,
    Numerical = 2,
    NotConverged = 3,
    Io = 4,
}

impl Error {
    pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            field,
            reason: reason.into(),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Invalid { .. } | Error::LengthMismatch { .. } | Error::UnknownExperiment(_) => {
                ErrorKind::Validation
            }
            Error::Json { .. } => ErrorKind::Validation,
            Error::Factorization(_)
            | Error::SolveResidual { .. }
            | Error::NonFinite { .. }
            | Error::SeriesNotConverged { .. }
            | Error::Breakdown { .. }
            | Error::DegenerateIterate { .. } => ErrorKind::Numerical,
            Error::Io { .. } | Error::Csv { .. } => ErrorKind::Io,
        }
    }
}

pub(crate) fn ensure_len(what: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::LengthMismatch {
            what,
            expected,
            got,
        });
    }
    Ok(())
}
