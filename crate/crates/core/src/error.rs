//! Crate-wide error type.

use thiserror::Error;

/// Errors raised by the series, lattice, product and verification layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A truncated series operation would produce an order below its lower bound.
    #[error("truncation order underflow: order {order} below lower bound {lower}")]
    TruncationUnderflow { order: i64, lower: i64 },

    /// A series with a non-monomial leading part was raised to a negative power.
    #[error("not invertible at this truncation")]
    NotInvertible,

    /// Incompatible operands (different variable conventions, offsets, dimensions).
    #[error("incompatible operands: {0}")]
    Incompatible(String),

    /// A lattice operation received a vector or lattice outside its domain.
    #[error("invalid lattice input: {0}")]
    InvalidLattice(String),

    /// The lattice is not 2-elementary where this is required.
    #[error("lattice is not 2-elementary")]
    NotTwoElementary,

    /// Enumeration region is not bounded.
    #[error("non-finite enumeration region: {0}")]
    NonFiniteRegion(String),

    /// A size limit was exceeded.
    #[error("size limit exceeded: {0}")]
    LimitExceeded(String),

    /// Unknown standard lattice name.
    #[error("unknown lattice name `{0}`")]
    UnknownLattice(String),

    /// A period point left the positive cone.
    #[error("cone violation: {0}")]
    ConeViolation(String),

    /// The requested tail target cannot be reached at this point.
    #[error("tail target unreachable: {0}")]
    TailUnreachable(String),

    /// A frame or partner vector search failed.
    #[error("frame search failed: {0}")]
    FrameSearch(String),

    /// Matrix is not in the required group.
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// Non-finite or out-of-domain numeric input.
    #[error("invalid numeric input: {0}")]
    InvalidInput(String),

    /// Usage errors in the command-line layer.
    #[error("usage: {0}")]
    Usage(String),
}

/// Convenience alias.
pub type Result<T> = std::result::Result<T, Error>;
