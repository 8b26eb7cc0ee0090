//! Experiment harness: seeded desk-scale reproductions of the perturbation
//! and Nyström studies, equivalence checks, and CSV result tables.

pub mod compare;
pub mod experiments;
pub mod report;
pub mod stats;

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error(transparent)]
    Numeric(#[from] pertext::Error),
    #[error("{context}: {source}")]
    Numerical {
        context: String,
        #[source]
        source: pertext::Error,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("slope undefined: {0}")]
    Slope(String),
    #[error("invalid report row: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, BenchError>;

/// Attaches context to a core error.
pub(crate) trait Context<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T>;
}

impl<T> Context<T> for pertext::Result<T> {
    fn context(self, what: impl FnOnce() -> String) -> Result<T> {
        self.map_err(|source| BenchError::Numerical { context: what(), source })
    }
}
