//! Crate-wide error type. Each variant maps to a distinct failure class (and
//! CLI exit code).

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed textual input (homogeneities, polynomials, tree notation).
    #[error("parse error: {0}")]
    Parse(String),
    /// Structurally invalid configuration or input data.
    #[error("invalid input: {0}")]
    Invalid(String),
    /// Reference to an undeclared label, edge type, symbol or indeterminate.
    #[error("unknown identifier: {0}")]
    Unknown(String),
    /// A mathematical precondition does not hold (e.g. rule not subcritical).
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// Enumeration or iteration exceeded its safety budget.
    #[error("budget exceeded: {0}")]
    Budget(String),
    /// Quadrature or fitting failed to meet its tolerance.
    #[error("numerical failure: {0}")]
    Numerics(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Short machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::Invalid(_) => "invalid",
            Error::Unknown(_) => "unknown",
            Error::Precondition(_) => "precondition",
            Error::Budget(_) => "budget",
            Error::Numerics(_) => "numerics",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
