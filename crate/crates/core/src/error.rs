//! Crate-level error with process exit codes.

use std::path::PathBuf;

use thiserror::Error;

use crate::config::ConfigError;
use crate::pipeline::{LoadError, StageError};
use crate::request::RequestError;
use crate::template::LibraryError;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_NO_CANDIDATE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error("load: {0}")]
    Load(#[from] LoadError),
    #[error(transparent)]
    Stage(#[from] StageError),
    #[error("request: {0}")]
    Request(#[from] RequestError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{stage}: {message}")]
    Failed { stage: &'static str, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io { path: path.into(), source }
    }

    pub fn failed(stage: &'static str, message: impl ToString) -> Error {
        Error::Failed { stage, message: message.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => EXIT_CONFIG,
            Error::Load(LoadError::Library(LibraryError::Io { .. })) => EXIT_IO,
            Error::Load(_) => EXIT_CONFIG,
            Error::Stage(e) if e.source.is_empty_candidate_set() => EXIT_NO_CANDIDATE,
            Error::Stage(e) if e.source.is_io() => EXIT_IO,
            Error::Stage(_) => EXIT_FAILURE,
            Error::Request(RequestError::ProductImage { .. }) => EXIT_IO,
            Error::Request(_) => EXIT_FAILURE,
            Error::Io { .. } => EXIT_IO,
            Error::Failed { .. } => EXIT_FAILURE,
        }
    }
}
