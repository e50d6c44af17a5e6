use std::path::PathBuf;

/// Errors produced anywhere in the selection, capacity and SER pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument violated a domain precondition (bad index, bad size, non-finite entry).
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller broke an API contract, such as asking for a mating pool from unscored chromosomes.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("exhaustive search needs {required} evaluations, above the enumeration cap of {cap}")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
