use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical failure in {step}: {detail}")]
    Numerical { step: &'static str, detail: String },

    /// `xᵀAx = 0`, so the replicator denominator vanishes.
    #[error("degenerate state: objective is zero, replicator step undefined")]
    Degenerate,

    #[error("replicator run did not converge after {iterations} steps (last objective {last_objective})")]
    NotConverged {
        iterations: usize,
        last_objective: f64,
        /// Objective after every step of the run.
        trace: Vec<f64>,
    },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
