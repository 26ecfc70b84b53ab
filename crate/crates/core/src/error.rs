use thiserror::Error;

/// Errors produced by game construction, mediation, assignment, and experiment setup.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("exhaustive search over {cells} cells exceeds the cap of {cap}")]
    TooLarge { cells: u128, cap: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("assignment infeasible: agent {agent} has no admissible slot")]
    Infeasible { agent: usize },

    #[error("invalid action: {0}")]
    InvalidAction(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("empty ratings table")]
    EmptyRatings,

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
