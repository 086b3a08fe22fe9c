use std::path::PathBuf;

use thiserror::Error;

/// Invalid parameters, detected before any simulation work starts.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("network needs at least {min} nodes, got {n}")]
    TooFewNodes { n: usize, min: usize },
    #[error("in-degree k must be between 1 and {max}, got {k}")]
    InDegree { k: usize, max: usize },
    #[error("{name} must lie strictly inside (0, 1), got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("{name} must be strictly positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("arena geometry infeasible: {0}")]
    Geometry(String),
    #[error("no collision-free pose found after {attempts} attempts")]
    NoFreePose { attempts: usize },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
