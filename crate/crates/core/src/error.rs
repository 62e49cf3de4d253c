//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by parsing, validation, and the solvers.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum Error {
    #[error("address width must be in 4..=32, got {0}")]
    InvalidWidth(u8),

    #[error("address {value} does not fit in {width} bits")]
    AddressOutOfRange { value: u64, width: u8 },

    #[error("prefix length {len} exceeds address width {width}")]
    PrefixLenOutOfRange { len: u8, width: u8 },

    #[error("prefix base {base:#x} has nonzero bits below position {width}-{len}")]
    PrefixBaseNotAligned { base: u32, len: u8, width: u8 },

    #[error("width mismatch: expected {expected}-bit operands, got {got}")]
    WidthMismatch { expected: u8, got: u8 },

    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("address set is empty")]
    EmptyAddressSet,

    #[error("requested {requested} addresses but the {width}-bit space holds only {capacity}")]
    SpaceExhausted { requested: u64, width: u8, capacity: u64 },

    #[error("total weight exceeds the representable objective range")]
    WeightOverflow,

    #[error("infeasible: {reason}")]
    Infeasible { reason: String, max_blockable: Option<u64> },

    #[error("address {0} is not in the blacklist")]
    AddressNotFound(u64),

    #[error("conflicting batch: {0}")]
    BatchConflict(String),

    #[error("enumeration budget exceeded: estimated {estimated} candidate sets (limit {limit})")]
    BudgetExceeded { estimated: u128, limit: u128 },

    #[error("invalid scenario: {0}")]
    Scenario(String),
}

impl Error {
    /// Build an infeasibility error with an optional certificate of the
    /// maximum traffic blockable within the filter budget.
    pub fn infeasible(reason: impl Into<String>, max_blockable: Option<u64>) -> Self {
        Error::Infeasible { reason: reason.into(), max_blockable }
    }

    /// True for errors that mean "the instance has no feasible solution"
    /// rather than "the input is malformed".
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible { .. })
    }
}
