//! Error type shared across the crate.

use thiserror::Error;

/// Everything that can go wrong constructing data or running a solver.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied argument is outside its documented range.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Matrix dimensions do not line up for the requested operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    /// A matrix or observation value is NaN or infinite.
    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    /// An observation references a cell outside the host matrix.
    #[error("index ({row}, {col}) out of range for {rows}x{cols} host")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },

    /// Two observations target the same cell.
    #[error("duplicate observation at ({row}, {col})")]
    DuplicateEntry { row: usize, col: usize },

    /// The SVD backend failed to converge.
    #[error("SVD failed to converge on a {rows}x{cols} matrix")]
    SvdFailure { rows: usize, cols: usize },

    /// A solver produced a non-finite objective; the trace up to the
    /// failure is attached for diagnosis.
    #[error("solver diverged at iteration {iteration}: {what}")]
    SolverDiverged {
        what: String,
        iteration: usize,
        trace: Box<crate::solvers::SolverTrace>,
    },

    /// A quotient that is undefined at this input (e.g. a perfect fit).
    #[error("{0} is undefined here: {1}")]
    Undefined(&'static str, String),

    /// A text file failed to parse; `line` is 1-based.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
