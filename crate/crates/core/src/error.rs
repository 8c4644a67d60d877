use thiserror::Error;

/// Errors raised while building states and channels or evaluating measures.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("hermiticity violated: max |M - M^dag| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("positivity violated: min eigenvalue = {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("trace violated: |tr - 1| = {deviation}")]
    TraceNotOne { deviation: f64 },

    #[error("normalization violated: | |v|^2 - 1 | = {deviation:e}")]
    NotNormalized { deviation: f64 },

    #[error("unitarity violated: max |U^dag U - I| = {deviation:e}")]
    NotUnitary { deviation: f64 },

    #[error("basis is not orthonormal: max |<m|n> - delta_mn| = {deviation:e}")]
    NotOrthonormal { deviation: f64 },

    #[error("Kraus completeness violated: max |sum K^dag K - I| = {deviation:e}")]
    Incomplete { deviation: f64 },

    #[error("operator is not an incoherent Kraus operator: {0}")]
    NotIncoherent(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("dimension {dim} exceeds the configured maximum {max}")]
    DimensionTooLarge { dim: usize, max: usize },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("ensemble size {ensemble} is smaller than the state rank {rank}")]
    EnsembleTooSmall { ensemble: usize, rank: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("optimizer failure: {0}")]
    Optimizer(String),

    #[error("malformed state file: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors that come from rejected input rather than a failed search.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Optimizer(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
