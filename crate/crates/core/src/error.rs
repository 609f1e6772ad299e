use thiserror::Error;

#[derive(Debug, Error)]
pub enum HrpError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("matrix is not orthogonal: max |DᵀD - I| = {residual:e} exceeds {tol:e}")]
    NotOrthogonal { residual: f64, tol: f64 },
    #[error("covariance is numerically rank deficient: min/max eigenvalue ratio {ratio:e}")]
    Conditioning { ratio: f64 },
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HrpError>;

pub(crate) fn check_dims(
    what: &str,
    expected: (usize, usize),
    found: (usize, usize),
) -> Result<()> {
    if expected != found {
        return Err(HrpError::DimensionMismatch {
            expected: format!("{what} {}x{}", expected.0, expected.1),
            found: format!("{}x{}", found.0, found.1),
        });
    }
    Ok(())
}
