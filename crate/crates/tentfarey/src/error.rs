//! Error and result types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// All failure modes surfaced by the library.
///
/// Batch tools map these onto process exit codes through
/// [`Error::exit_code`]: bad input is distinguished from a request that is
/// well-formed but exceeds a hard resource limit (for instance an exact
/// branch-tree deeper than [`crate::transfer::MAX_TREE_DEPTH`]).
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter, point, or parse input lies outside its documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A well-formed request exceeds a hard resource limit.
    #[error("capacity exceeded: {0}")]
    Capacity(String),
    /// A computation left the numerically meaningful regime (for example a
    /// vanishing Möbius denominator).
    #[error("numerical domain error: {0}")]
    Numerical(String),
    /// The operation is not defined for the given representation (for example
    /// an ω-limit set of a generator-backed aperiodic continued fraction).
    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    /// Process exit code used by the command-line tools: `2` for input-side
    /// failures, `3` for capacity limits.
    #[must_use]
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_) | Error::Numerical(_) | Error::Unsupported(_) => 2,
            Error::Capacity(_) => 3,
        }
    }
}

/// Shorthand for building an [`Error::InvalidInput`].
pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// Shorthand for building an [`Error::Capacity`].
pub(crate) fn capacity(msg: impl Into<String>) -> Error {
    Error::Capacity(msg.into())
}
