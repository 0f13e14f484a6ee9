use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A value is outside the domain of an operation (bad level, unknown
    /// vertex, out-of-range index, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition of an operation does not hold for the
    /// supplied arguments.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A requested instance would exceed the configured memory budget.
    #[error("resource budget exceeded: {0}")]
    Resource(String),

    /// One of the labelled conclusions of the normal-form reduction failed
    /// on the supplied family. The tag names the failed equation.
    #[error("reduction invariant `{tag}` failed: {detail}")]
    Reduction { tag: &'static str, detail: String },

    /// Malformed input file or string.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn resource(msg: impl Into<String>) -> Self {
        Error::Resource(msg.into())
    }

    pub fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}
