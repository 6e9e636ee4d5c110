use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("column {0} has (near) zero variance")]
    ConstantColumn(usize),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("Gram matrix is numerically singular (pivot ratio {ratio:e} at position {position})")]
    SingularGram { position: usize, ratio: f64 },

    #[error("matrix is not symmetric (|a_ij - a_ji| = {0:e})")]
    NotSymmetric(f64),

    #[error("parse error at row {row}, column {col}: {message}")]
    ParseError {
        row: usize,
        col: usize,
        message: String,
    },

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("residual is numerically zero")]
    ZeroResidual,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("oracle stopping requires the true coefficients")]
    OracleUnavailable,

    #[error("invalid threshold: 1 - c*log(p)/n = {0} is not positive")]
    InvalidThreshold(f64),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigen scan covers sizes up to {scanned}, but q(m) reaches {needed}")]
    InsufficientEigenScan { scanned: usize, needed: usize },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serialization(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad input or configuration rather than numerics.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::ParseError { .. }
                | Error::MissingColumn(_)
                | Error::InvalidConfig(_)
                | Error::Io { .. }
                | Error::Serialization(_)
                | Error::LengthMismatch { .. }
                | Error::OracleUnavailable
                | Error::Domain(_)
        )
    }
}
