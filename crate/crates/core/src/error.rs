use thiserror::Error;

use crate::grid::GridShape;

pub type Result<T> = std::result::Result<T, TvError>;

#[derive(Debug, Error)]
pub enum TvError {
    #[error("grid must have at least one row and one column, got {rows}x{cols}")]
    EmptyGrid { rows: usize, cols: usize },

    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: GridShape, found: GridShape },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("subdomain id {id} out of range (partition has {count} subdomains)")]
    InvalidSubdomain { id: usize, count: usize },

    #[error("interface edge {edge} has jump {jump:e}, exceeds tolerance {tol:e}")]
    JumpViolation { edge: usize, jump: f64, tol: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("iteration diverged at step {iter}: {detail}")]
    Diverged { iter: usize, detail: String },

    #[error("cannot average an empty trace")]
    EmptyTrace,

    #[error("operator too large for dense oracle: {rows}x{cols} grid exceeds {limit}x{limit}")]
    SizeGuard { rows: usize, cols: usize, limit: usize },

    #[error("unsupported image: {0}")]
    UnsupportedImage(String),

    #[error("image codec error: {0}")]
    Codec(#[from] image::ImageError),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
