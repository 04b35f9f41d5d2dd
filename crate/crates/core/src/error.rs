use std::path::PathBuf;

/// Errors produced by the numerical kernels, the generators and the I/O layer.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("shape mismatch in {op}: expected {expected}, got {got}")]
    Shape {
        op: &'static str,
        expected: String,
        got: String,
    },

    #[error("contract violation in {op}: {reason}")]
    Contract { op: &'static str, reason: String },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{algorithm} did not converge after {iterations} iterations")]
    NoConvergence {
        algorithm: &'static str,
        iterations: usize,
    },

    #[error("matrix is singular to working precision: pivot {index} has magnitude {magnitude:e}")]
    Singular { index: usize, magnitude: f64 },

    #[error("demotion to {level} overflows at {count} entries, first offenders (row, col): {indices:?}")]
    Overflow {
        level: &'static str,
        count: usize,
        indices: Vec<(usize, usize)>,
    },

    #[error("assumption gate violated in {op}: {reason}")]
    Gate { op: &'static str, reason: String },

    #[error("fixed-point iteration failed in {op}: {reason}; use the dense eigensolver instead")]
    FixedPoint { op: &'static str, reason: String },

    #[error("parse error in {source_name}, line {line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn shape(op: &'static str, expected: impl Into<String>, got: impl Into<String>) -> Self {
        Error::Shape {
            op,
            expected: expected.into(),
            got: got.into(),
        }
    }

    pub(crate) fn contract(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Contract {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
