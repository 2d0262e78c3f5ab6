use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is singular (zero pivot in column {column})")]
    Singular { column: usize },

    #[error("shifted operator I - theta*Z_{direction} is singular")]
    SingularShift { direction: usize },

    #[error("dense path limited to {cap} unknowns, requested {requested}")]
    DenseCapExceeded { requested: usize, cap: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("coefficient condition violated: |d12| = {d12_abs} > gamma*sqrt(d11*d22) = {bound}")]
    Coefficients { d12_abs: f64, bound: f64 },

    #[error("symbol triple violates the admissible domain: {0}")]
    SymbolDomain(String),

    #[error("outside the domain of the bound: {0}")]
    BoundDomain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("reference cross-check failed: {0}")]
    ReferenceMismatch(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
