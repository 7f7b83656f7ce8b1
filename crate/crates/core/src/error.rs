//! Error type shared by every stage of the analysis pipeline.

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("count matrix is not square: row {row} has {len} entries, expected {expected}")]
    NonSquare {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("table must have at least 2 categories, got {0}")]
    TooFewCategories(usize),
    #[error("negative count {value} in cell ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: i64 },
    #[error("table total is zero")]
    EmptyTable,
    #[error("duplicate category label {0:?}")]
    DuplicateLabel(String),
    #[error("{labels} labels given for a {size}x{size} table")]
    LabelCountMismatch { labels: usize, size: usize },
    #[error("lambda must be greater than -1, got {0}")]
    LambdaOutOfRange(f64),
    #[error("cell ({0}, {0}) is on the diagonal")]
    DiagonalCell(usize),
    #[error("all observations lie on the diagonal; the asymmetry measure is undefined")]
    DegenerateTable,
    #[error("table is fully symmetric; there is no asymmetry to decompose")]
    FullySymmetric,
    #[error("confidence regions need at least 3 categories, got {0}")]
    UnsupportedDimension(usize),
    #[error("confidence regions require the averaged metric")]
    IdentityMetricUnsupported,
    #[error("alpha must lie strictly between 0 and 1, got {0}")]
    InvalidAlpha(f64),
    #[error("degrees of freedom must be at least 1, got {0}")]
    InvalidDof(u64),
    #[error("category labels differ between tables: {left:?} vs {right:?}")]
    LabelMismatch {
        left: Vec<String>,
        right: Vec<String>,
    },
    #[error("tables have different sizes: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("malformed CSV at line {line}: {message}")]
    MalformedCsv { line: usize, message: String },
    #[error("row label {found:?} at position {position} does not match column label {expected:?}")]
    LabelOrderMismatch {
        position: usize,
        expected: String,
        found: String,
    },
    #[error("dimension {dim} is out of range 1..={max}")]
    DimensionOutOfRange { dim: usize, max: usize },
    #[error("invalid lambda grid: {0}")]
    InvalidGrid(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("I/O error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by malformed or inconsistent input, as opposed
    /// to well-formed input on which the computation is undefined.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::DegenerateTable
                | Error::FullySymmetric
                | Error::UnsupportedDimension(_)
                | Error::IdentityMetricUnsupported
                | Error::Numerical(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
