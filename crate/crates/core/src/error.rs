use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the solver pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is missing, malformed or out of range.
    #[error("invalid configuration for `{key}`: {msg}")]
    Config { key: String, msg: String },

    /// A field contains NaN or infinite values.
    #[error("non-finite value in {what} at index {index}")]
    NonFinite { what: &'static str, index: usize },

    /// The time stepper produced a non-finite or runaway state.
    #[error("simulation diverged at step {step} (max |eta| = {max_abs:e})")]
    Diverged { step: u64, max_abs: f64 },

    /// An IMEX table has a zero denominator at some mode.
    #[error("singular IMEX table: h * L = 1 at mode {mode}")]
    SingularTable { mode: usize },

    /// The requested operation is not defined for this grid or model.
    #[error("unsupported operation: {0}")]
    Unsupported(String),

    /// Two fields do not live on the same grid.
    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("missing file {}", path.display())]
    MissingFile { path: PathBuf },

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed {what}: {msg}")]
    Format { what: &'static str, msg: String },
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile { path }
        } else {
            Error::Io { path, source }
        }
    }

    /// Short machine-readable tag used in CLI error lines.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config { .. } => "config",
            Error::NonFinite { .. } => "numeric",
            Error::Diverged { .. } => "diverged",
            Error::SingularTable { .. } => "singular",
            Error::Unsupported(_) => "unsupported",
            Error::Shape(_) => "shape",
            Error::MissingFile { .. } => "missing",
            Error::Io { .. } => "io",
            Error::Format { .. } => "format",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
