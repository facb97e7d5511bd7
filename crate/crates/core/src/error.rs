use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("discount factor must lie strictly inside (0, 1), got {0}")]
    InvalidGamma(f64),

    #[error("return {0} is outside the invertible range (-1, 0]")]
    ReturnOutOfRange(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown prompt id `{0}`")]
    UnknownPrompt(String),

    #[error("state {0} is terminal and has no next-token distribution")]
    TerminalState(usize),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid generator: {0}")]
    InvalidGenerator(String),

    #[error("generator is not absorbing: {0}")]
    NonAbsorbing(String),

    #[error("dataset is empty: {0}")]
    EmptyDataset(String),

    #[error("feature dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("training diverged at epoch {epoch}: loss is {loss}")]
    Diverged { epoch: usize, loss: f64 },

    #[error("candidate set is empty after truncation at state {state}")]
    EmptyCandidates { state: usize },

    #[error("distribution q puts mass {mass} on token {token} outside the base support")]
    SupportMismatch { token: u32, mass: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the `lenvm` binary.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Diverged { .. } | Error::NonAbsorbing(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
