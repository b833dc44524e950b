use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates a precondition (dimension, sign, grid shape).
    #[error("input error: {0}")]
    Input(String),

    /// A solve that needs an invertible matrix met a numerically singular one.
    #[error("rank error: {0}")]
    Rank(String),

    /// An integrator produced a non-finite state.
    #[error("divergence at t = {time}: {message} (last finite state {last_state:?})")]
    Divergence {
        time: f64,
        last_state: Vec<f64>,
        message: String,
    },

    #[error("parse error in {path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Prefixes the message of input and rank errors with `ctx`.
    pub fn context(self, ctx: impl std::fmt::Display) -> Self {
        match self {
            Error::Input(m) => Error::Input(format!("{ctx}: {m}")),
            Error::Rank(m) => Error::Rank(format!("{ctx}: {m}")),
            Error::Divergence {
                time,
                last_state,
                message,
            } => Error::Divergence {
                time,
                last_state,
                message: format!("{ctx}: {message}"),
            },
            other => other,
        }
    }

    /// Process exit code for the command-line front end, one per category.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_) => 2,
            Error::Rank(_) => 3,
            Error::Divergence { .. } => 4,
            Error::Parse { .. } => 5,
            Error::Schema { .. } => 6,
            Error::Io { .. } => 7,
        }
    }

    /// Short category tag used as a message prefix by the CLI.
    pub fn category(&self) -> &'static str {
        match self {
            Error::Input(_) => "E-INPUT",
            Error::Rank(_) => "E-RANK",
            Error::Divergence { .. } => "E-DIVERGENCE",
            Error::Parse { .. } => "E-PARSE",
            Error::Schema { .. } => "E-SCHEMA",
            Error::Io { .. } => "E-IO",
        }
    }
}

pub(crate) fn check_dim(what: &str, expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::Input(format!(
            "{what}: expected dimension {expected}, got {got}"
        )));
    }
    Ok(())
}
