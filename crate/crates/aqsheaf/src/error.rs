use thiserror::Error;

/// Failure modes shared by every module.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// A structure violates its own invariants (not a subgroup, not a homomorphism, ...).
    #[error("structural error: {0}")]
    Structural(String),
    /// Malformed or unresolvable user input.
    #[error("input error: {0}")]
    Input(String),
    /// An enumeration would exceed the configured budget.
    #[error("resource error: {what} needs {needed} candidates (budget {budget})")]
    Resource { what: String, needed: u128, budget: u64 },
    /// A checked claim failed; `anchor` names the claim.
    #[error("verification failed [{anchor}]: {detail}")]
    Verification { anchor: String, detail: String },
    /// The operation does not support this representation.
    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn structural(msg: impl Into<String>) -> Error {
    Error::Structural(msg.into())
}

pub(crate) fn input(msg: impl Into<String>) -> Error {
    Error::Input(msg.into())
}

pub(crate) fn unsupported(msg: impl Into<String>) -> Error {
    Error::Unsupported(msg.into())
}
