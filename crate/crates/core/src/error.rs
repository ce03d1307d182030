use std::path::PathBuf;

/// Errors raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("packing failed after {rejections} consecutive rejections ({placed} inclusions placed)")]
    PackingFailure { rejections: usize, placed: usize },

    #[error("1/eps = {inverse} is not an integer")]
    NonIntegerTiling { inverse: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate triangle {element} (area {area:e})")]
    SingularElement { element: usize, area: f64 },

    #[error("iterative solver did not converge in {max_iter} iterations (relative residual {residual:e})")]
    NoConvergence { max_iter: usize, residual: f64 },

    #[error("matrix is not positive definite (pivot/curvature {value:e} at index {index})")]
    NotPositiveDefinite { index: usize, value: f64 },

    #[error("temperature grid has {points} points, at least 3 are required")]
    GridTooCoarse { points: usize },

    #[error("invalid temperature grid: {0}")]
    InvalidGrid(String),

    #[error("Picard iteration did not converge in {max_iter} iterations at step {step} (last change {last_change:e} K)")]
    PicardNoConvergence {
        step: usize,
        max_iter: usize,
        last_change: f64,
        /// The last two iterates, most recent last.
        iterates: Box<[Vec<f64>; 2]>,
    },

    #[error("empty sample set")]
    EmptySampleSet,

    #[error("reference norm {norm:e} is too small for a relative error")]
    ZeroReference { norm: f64 },

    #[error("missing cell table for sample {sample}: {reason}")]
    MissingTable { sample: usize, reason: String },

    #[error("cache entry {path} is corrupt: {reason}")]
    CacheCorrupt { path: PathBuf, reason: String },

    #[error("invalid material law: {0}")]
    InvalidMaterial(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
