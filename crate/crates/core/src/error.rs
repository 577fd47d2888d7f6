use thiserror::Error;

/// Errors raised by the closure computation and its numeric substrate.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// The exponent lies outside `r > 1`.
    #[error("domain error: {0}")]
    Domain(String),

    /// A certified evaluation could not reach the requested accuracy.
    #[error("range error: {0}")]
    Range(String),

    /// Two quantities could not be separated up to the maximum precision.
    #[error("undecided comparison at {prec} bits: {lhs} vs {rhs}")]
    Comparison { lhs: String, rhs: String, prec: u32 },

    /// An endpoint expression was multiplied twice by a factor at the same prime.
    #[error("prime index {0} already present in endpoint expression")]
    DuplicatePrime(usize),

    #[error("parse error: {0}")]
    Parse(String),

    /// A runtime invariant of the algorithm failed. Always a bug.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
