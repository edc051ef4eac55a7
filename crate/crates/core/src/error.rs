use thiserror::Error;

/// Errors reported by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate matrix: {0}")]
    Degenerate(String),
    #[error("numerical failure: {message} (residual {residual:e})")]
    Numerical { message: String, residual: f64 },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("point is not optimal: {0}")]
    NotOptimal(String),
    #[error("degenerate optimality classification: {0}")]
    Classification(String),
    #[error("system has {rows} rows, above the enumeration cap of {cap}")]
    Size { rows: usize, cap: usize },
    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
