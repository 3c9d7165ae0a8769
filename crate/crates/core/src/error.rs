use thiserror::Error;

/// Errors raised by the covariance-matrix, Fock-space and GGM routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("invalid mode selection: {0}")]
    ModeSelection(String),

    #[error("invalid symplectic spectrum: eigenvalue {0} below 1/2")]
    InvalidSpectrum(f64),

    #[error("state is not pure: symplectic eigenvalue deviates from 1/2 by {0:e}")]
    Impure(f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("truncation tail {achieved:e} exceeds requested bound {requested:e}")]
    Truncation { achieved: f64, requested: f64 },

    #[error("photon subtraction annihilates the whole truncated state")]
    EmptyResult,

    #[error("reduced basis of size {size} exceeds capacity {cap}")]
    Capacity { size: usize, cap: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
