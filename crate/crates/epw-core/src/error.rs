use thiserror::Error;

#[derive(Debug, Error)]
pub enum EpwError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("not a fundamental system: {0}")]
    NotFundamental(String),
    #[error("nonpositive cubature weight {weight:e} at index {index}")]
    Positivity { index: usize, weight: f64 },
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("validation error: {0}")]
    Validation(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, EpwError>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(EpwError::Domain(msg.into()))
}
