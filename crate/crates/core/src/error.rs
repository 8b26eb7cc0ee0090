use thiserror::Error;

/// Errors raised by the linear-algebra, perturbation and extension routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },

    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    /// Two consecutive eigenvalues (0-based `index` and `index + 1`) are too close.
    #[error("eigengap {gap:e} between eigenvalues {index} and {} is below tolerance", .index + 1)]
    EigengapTooSmall { index: usize, gap: f64 },

    /// A denominator `t_i - mu` (or a pivot eigenvalue) is numerically zero.
    #[error("denominator for eigenvalue {index} is {value:e}, below tolerance")]
    SingularDenominator { index: usize, value: f64 },

    #[error("block is rank deficient at column {column}")]
    RankDeficient { column: usize },

    #[error("invalid selector: {0}")]
    InvalidSelector(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
