use thiserror::Error;

/// Errors shared by the grid, frame, model and recovery modules.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("grid side {0} is not a power of two >= 16")]
    BadGridSize(usize),

    #[error("scale {scale} does not fit a grid of side {n}")]
    ScaleOverflow { scale: i32, n: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    BadArgument(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("grid is not real-valued (max |imag| = {0:e})")]
    NotReal(f64),

    #[error("bad file format at byte {offset}: {reason}")]
    Format { offset: u64, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
