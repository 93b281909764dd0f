use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("generator matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("generators are singular to working precision (reciprocal condition {rcond:.3e})")]
    SingularGenerators { rcond: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{system} Gram system could not be solved")]
    SolveFailure { system: &'static str },

    #[error("converged coefficients do not reconstruct the point (residual {residual:.3e})")]
    Inaccurate { residual: f64 },

    #[error("dimension {n} exceeds the exhaustive-search guard {guard} (the search costs 2^n solves)")]
    DimensionGuard { n: usize, guard: usize },

    #[error("no sector passed the sign tests; tolerance too tight or cone corrupted")]
    NoSectorFound,

    #[error("cone is not subdual")]
    NotSubdual,

    #[error("no invertible generator matrix after {attempts} draws")]
    GenerationFailure { attempts: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
