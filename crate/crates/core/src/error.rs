use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("{what} index {index} out of range (limit {limit})")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("sparsity pattern mismatch: {0}")]
    PatternMismatch(String),

    #[error("degenerate triangle (signed area {0:e})")]
    DegenerateTriangle(f64),

    #[error("{solver} did not converge after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence {
        solver: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("zero pivot at row {0} during factorization")]
    ZeroPivot(usize),

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("fixed-point iteration did not converge in {iterations} iterations (last error {error:e})")]
    FixedPoint { iterations: usize, error: f64 },

    #[error("config error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("expression error: {0}")]
    Expr(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
