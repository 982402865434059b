use std::io;
use std::path::PathBuf;

use crdiv_core::ParamError;

/// Failures surfaced by the experiment runner, each tied to an exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid parameters: {0}")]
    Params(#[from] ParamError),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("write failed: {0}")]
    Write(#[from] io::Error),
    #[error("malformed sweep CSV: {0}")]
    MalformedCsv(String),
}

impl CliError {
    pub const EXIT_USAGE: u8 = 2;
    pub const EXIT_INVALID_PARAMS: u8 = 3;
    pub const EXIT_IO: u8 = 4;

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => Self::EXIT_USAGE,
            CliError::Params(_) | CliError::InvalidConfig(_) => Self::EXIT_INVALID_PARAMS,
            CliError::Io { .. } | CliError::Write(_) | CliError::MalformedCsv(_) => Self::EXIT_IO,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Write(io),
            other => CliError::MalformedCsv(format!("{other:?}")),
        }
    }
}
