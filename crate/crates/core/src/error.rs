use thiserror::Error;

use crate::model::OrderViolation;

/// Every failure the library can report.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid preference order for agent {agent}: {violation}")]
    InvalidOrder {
        agent: usize,
        violation: OrderViolation,
    },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),

    #[error("outcome out of range: {0}")]
    OutOfRange(String),

    #[error("agent id {agent} out of range for {n} agents")]
    UnknownAgent { agent: usize, n: usize },

    #[error("operation requires exactly 2 alternatives, profile has {0}")]
    WrongArity(usize),

    #[error("search space of {required} exceeds the cap of {cap}")]
    CapExceeded { required: u128, cap: u64 },

    #[error("agent {agent} gave an out-of-protocol answer: {detail}")]
    Protocol { agent: usize, detail: String },

    #[error("domain violation: {0}")]
    DomainViolation(String),

    #[error("unrealizable class: {0}")]
    Unrealizable(String),

    #[error("elicitation session aborted: {0}")]
    SessionAborted(String),

    #[error("internal error: {0}")]
    Internal(String),

    #[error("malformed document: {0}")]
    Format(String),
}

impl Error {
    /// Size-guard failures are reported separately from domain errors by the CLI.
    pub fn is_cap(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
