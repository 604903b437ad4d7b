use alloc::string::String;
use core::fmt;

/// Errors produced by the simulation core.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument was outside its documented domain.
    InvalidArgument(String),
    /// The input makes a quantity diverge (zero drive, coincident atoms, ...).
    SingularInput(String),
    /// The request exceeds a size cap (exact search, dense matrices, ...).
    ResourceLimit {
        resource: &'static str,
        limit: usize,
        requested: usize,
    },
    /// A quantum state violated its normalization invariant.
    InvalidState(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn singular(msg: impl Into<String>) -> Self {
        Error::SingularInput(msg.into())
    }

    pub(crate) fn limit(resource: &'static str, limit: usize, requested: usize) -> Self {
        Error::ResourceLimit {
            resource,
            limit,
            requested,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::SingularInput(msg) => write!(f, "singular input: {msg}"),
            Error::ResourceLimit {
                resource,
                limit,
                requested,
            } => write!(
                f,
                "resource limit exceeded for {resource}: requested {requested}, cap is {limit}"
            ),
            Error::InvalidState(msg) => write!(f, "invalid state: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
