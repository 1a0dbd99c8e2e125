use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("matrix contains non-finite entries")]
    NonFinite,
    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },
    #[error("matrix is singular (sigma_min = {sigma_min:.3e}, sigma_max = {sigma_max:.3e})")]
    Singular { sigma_min: f64, sigma_max: f64 },
    #[error(
        "sequence is not a frame (lambda_min = {lambda_min:.3e}, lambda_max = {lambda_max:.3e})"
    )]
    NotAFrame { lambda_min: f64, lambda_max: f64 },
    #[error("symbol has a zero entry at index {index}")]
    ZeroEntry { index: usize },
    #[error("not a dual frame of the given parent (reconstruction residual {residual:.3e})")]
    InvalidDual { residual: f64 },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("malformed document: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
