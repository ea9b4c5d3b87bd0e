use thiserror::Error;

/// Errors raised by the counting, estimation and closed-form routines.
///
/// Variants fall in two families: validation errors (bad input) and
/// capability errors (valid input that exceeds a documented size limit).
/// The CLI maps them to exit codes 2 and 3 respectively.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("ragged row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid entry {found:?} at row {row}, column {col}")]
    InvalidEntry { row: usize, col: usize, found: String },
    #[error("operation requires a matrix with at least one row")]
    EmptyMatrix,
    #[error("column {col} out of range 1..={cols}")]
    ColumnOutOfRange { col: usize, cols: usize },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix has more rows than columns ({rows}x{cols}); AM is defined for m <= n")]
    TooManyRows { rows: usize, cols: usize },
    #[error("{what}: size {found} exceeds limit {limit}{}", hint_suffix(.hint))]
    Capability {
        what: &'static str,
        limit: u128,
        found: u128,
        hint: Option<&'static str>,
    },
    #[error("critical ratio undefined: estimator mean is zero")]
    ZeroMean,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
}

fn hint_suffix(hint: &Option<&'static str>) -> String {
    match hint {
        Some(h) => format!(" ({h})"),
        None => String::new(),
    }
}

impl Error {
    pub fn is_capability(&self) -> bool {
        matches!(self, Error::Capability { .. })
    }

    pub(crate) fn capability(
        what: &'static str,
        limit: u128,
        found: u128,
        hint: Option<&'static str>,
    ) -> Self {
        Error::Capability {
            what,
            limit,
            found,
            hint,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
