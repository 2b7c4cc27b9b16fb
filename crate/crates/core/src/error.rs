use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Input data is malformed or inconsistent.
    #[error("data error: {0}")]
    Data(String),

    /// Model, sampler or command-line configuration is invalid.
    #[error("config error: {0}")]
    Config(String),

    /// A parameter state broke one of its structural invariants.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// A statistic is undefined for the given input, e.g. a constant trace.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Failure while writing an output file.
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}: {source}", path.display())]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub(crate) fn degenerate(msg: impl Into<String>) -> Self {
        Error::Degenerate(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn write(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Write {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn csv(path: impl Into<PathBuf>, source: csv::Error) -> Self {
        Error::Csv {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    ///
    /// Data problems (including unreadable input files) map to 2, configuration
    /// problems to 3, everything else to 1.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Data(_) | Error::Io { .. } | Error::Csv { .. } => 2,
            Error::Config(_) => 3,
            Error::Invariant(_) | Error::Degenerate(_) | Error::Write { .. } => 1,
        }
    }
}
