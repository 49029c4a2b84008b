use std::path::PathBuf;

/// Errors raised across the optimizer, oracle, diagnostics and harness layers.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A configuration value is out of range or inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    /// A caller broke an API contract (mismatched dimensions, missing trace data, ...).
    #[error("contract error: {0}")]
    Contract(String),

    /// A computation produced NaN or infinity.
    #[error("numeric error at step {step}: {msg}")]
    Numeric { step: usize, msg: String },

    /// A point lies outside the domain of an objective.
    #[error("domain error: {0}")]
    Domain(String),

    /// An experiment document could not be parsed or validated.
    #[error("parse error in {context}: {msg}")]
    Parse { context: String, msg: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        Error::Contract(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
