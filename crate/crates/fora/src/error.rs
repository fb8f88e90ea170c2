use thiserror::Error;

/// Errors surfaced by graph loading, parameter validation, and index I/O.
#[derive(Debug, Error)]
pub enum ForaError {
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("edge list is empty: {0}")]
    EmptyGraph(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("invalid parameter {name} = {value} (expected {expected})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },

    #[error("source distribution sums to {0}, expected 1")]
    UnnormalizedDistribution(f64),

    #[error("index format error: {0}")]
    IndexFormat(String),

    #[error("index incompatible with query: {0}")]
    IndexMismatch(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, ForaError>;
