//! Crate-wide error type. Variants map onto the CLI exit-code contract:
//! `Config` → usage/configuration (2), `Numerical`/`Certificate` → numerical
//! failure (3), `CheckFailed` → failed verification check (1).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid configuration, argument, or precondition violation.
    #[error("configuration: {0}")]
    Config(String),

    /// Operands live on different tori or window sizes.
    #[error("spec mismatch: {0}")]
    SpecMismatch(String),

    /// Numerical breakdown: non-finite values, failed convergence, overflow.
    #[error("numerical: {0}")]
    Numerical(String),

    /// A resonance certificate is missing, stale, or contradicted.
    #[error("certificate: {0}")]
    Certificate(String),

    /// A verification check ran to completion and failed its tolerance.
    #[error("check failed: {0}")]
    CheckFailed(String),

    /// Filesystem error with path context.
    #[error("io ({path}): {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// Report or config (de)serialization failure.
    #[error("serialize: {0}")]
    Serialize(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub fn certificate(msg: impl Into<String>) -> Self {
        Error::Certificate(msg.into())
    }

    pub fn check_failed(msg: impl Into<String>) -> Self {
        Error::CheckFailed(msg.into())
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code this error class maps to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::SpecMismatch(_) | Error::Io { .. } | Error::Serialize(_) => 2,
            Error::Numerical(_) | Error::Certificate(_) => 3,
            Error::CheckFailed(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
