use std::path::PathBuf;

use thiserror::Error;

use crate::lp::FractionalSolution;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{source_name}:{line}: {reason}")]
    Parse {
        source_name: String,
        line: usize,
        reason: String,
    },

    #[error("{0}")]
    Input(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("exact enumeration refused: {n} genes exceeds the limit of {max}")]
    TooLarge { n: usize, max: usize },

    #[error("LP solver failed: {0}")]
    Solver(String),

    /// The cutting-plane loop ran out of rounds; `best` is the last iterate.
    #[error("LP did not reach triangle feasibility after {rounds} rounds (max violation {max_violation:.3e})")]
    NotConverged {
        best: Box<FractionalSolution>,
        max_violation: f64,
        rounds: usize,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn parse(source_name: &str, line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures caused by the numerical pipeline rather than by the
    /// caller's inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Solver(_) | Error::NotConverged { .. })
    }
}
