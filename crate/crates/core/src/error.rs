use thiserror::Error;

use crate::linalg::SingularTriplet;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix entry at ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("entry buffer has {len} values, expected {rows}x{cols}")]
    ShapeMismatch { rows: usize, cols: usize, len: usize },

    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("relative error is undefined for a zero matrix")]
    ZeroMatrix,

    #[error("power iteration did not converge after {iters} iterations")]
    NoConvergence {
        iters: usize,
        best: Box<SingularTriplet>,
    },

    #[error("result of {rows}x{cols} exceeds the element cap of {cap}")]
    SizeOverflow { rows: usize, cols: usize, cap: usize },

    #[error("construction failed: {0}")]
    ConstructionFailed(String),

    #[error("invalid rank {r} for a {m}x{n} matrix: {reason}")]
    InvalidRank {
        r: usize,
        m: usize,
        n: usize,
        reason: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown name {name:?}; expected one of: {expected}")]
    UnknownName { name: String, expected: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
