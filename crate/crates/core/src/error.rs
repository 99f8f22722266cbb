//! Error type shared by the whole pipeline.

use thiserror::Error;

/// Errors produced anywhere in the tone-mapping pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed file header or structure.
    #[error("format error: {0}")]
    Format(String),

    /// Input ended before the declared pixel data was complete.
    #[error("truncated input: {0}")]
    Truncated(String),

    /// Recognized but unsupported file variant.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// Input is valid but degenerate (e.g. an all-black image).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Plane dimensions do not agree.
    #[error("shape mismatch: expected {expected_w}x{expected_h}, got {got_w}x{got_h}")]
    ShapeMismatch {
        expected_w: usize,
        expected_h: usize,
        got_w: usize,
        got_h: usize,
    },

    /// A parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A non-finite value appeared during optimization.
    #[error("numerical error: {0}")]
    Numerical(String),

    /// The reference solver failed to converge (test infrastructure error).
    #[error("oracle failure: {0}")]
    OracleFailure(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("png encoding error: {0}")]
    Png(#[from] image::ImageError),
}

pub type Result<T> = std::result::Result<T, Error>;
