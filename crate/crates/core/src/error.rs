use std::path::PathBuf;

use thiserror::Error;

use crate::citymap::{MapError, ScenarioError};
use crate::geometry::GeometryError;
use crate::graph::GraphError;
use crate::plasmodium::SimError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Top-level error. The CLI maps [`Error::exit_code`] onto the process exit
/// status: validation problems exit with 1, I/O problems with 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error("{0}")]
    Validation(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Io { .. } | Error::Format { .. } => 2,
            Error::Map(MapError::Io { .. }) | Error::Map(MapError::Decode { .. }) => 2,
            Error::Scenario(ScenarioError::Io { .. }) => 2,
            Error::Scenario(ScenarioError::Map(MapError::Io { .. })) => 2,
            _ => 1,
        }
    }
}
