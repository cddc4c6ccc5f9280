use thiserror::Error;

/// Errors produced by the discretization, solver and analysis routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh construction failed: {0}")]
    MeshConstruction(String),

    #[error("{method} system with N={n_elements} elements is singular (zero pivot)")]
    Singular { method: String, n_elements: usize },

    #[error("unknown problem `{id}`; available: {}", available.join(", "))]
    UnknownProblem { id: String, available: Vec<String> },

    #[error("problem `{id}` failed registration check: {reason}")]
    InvalidProblem { id: String, reason: String },

    #[error("functions live on different discretizations: {0}")]
    Mismatch(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
