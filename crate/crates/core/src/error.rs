use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Arity(String),

    #[error("row {0} has zero norm")]
    DegenerateRow(usize),

    #[error("degenerate system: {0}")]
    DegenerateSystem(String),

    #[error("degenerate paving: {0}")]
    DegeneratePaving(String),

    #[error("gram matrix is singular (condition number is infinite)")]
    InfiniteCondition,

    #[error("condition bound undefined for orthogonality value {0} >= 1")]
    CondBoundUndefined(f64),

    #[error("numerical computation failed: {0}")]
    Computation(String),

    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
