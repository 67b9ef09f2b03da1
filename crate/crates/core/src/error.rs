use std::io;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised across the library.
///
/// Variants are grouped so that the command-line front end can map them onto
/// stable exit codes (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied value violates an operation's precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// The requested combination is valid but not implemented (e.g. a kd-tree
    /// under a non-Euclidean norm).
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numerical procedure failed: singular systems, density underflow,
    /// quadrature missing its tolerance, vanishing gradients on the boundary.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An experiment or population configuration is inconsistent.
    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code used by the CLI: 3 for numerical failures, 2 for
    /// everything the caller could fix by changing its input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}
