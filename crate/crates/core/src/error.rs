use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("arity mismatch: expected {expected}, found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("conductor mismatch: {0} vs {1}")]
    ConductorMismatch(u64, u64),

    #[error("{k} is not a unit modulo {m}")]
    NotAUnit { k: u64, m: u64 },

    #[error("subgroup is not cyclic")]
    NotCyclic,

    #[error("subgroup containment violated")]
    NotContained,

    #[error("resource cap exceeded: {what} needs {requested}, limit is {limit}")]
    ResourceCap {
        what: &'static str,
        requested: u128,
        limit: u128,
    },

    #[error("polynomial division is not exact")]
    NotDivisible,

    #[error("polynomial is not a perfect square")]
    NotSquare,

    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn cap(what: &'static str, requested: u128, limit: u128) -> Self {
        Error::ResourceCap {
            what,
            requested,
            limit,
        }
    }
}
