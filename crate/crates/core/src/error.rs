use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("inner lattice is not contained in the outer lattice at p = {p}")]
    NotSublattice { p: u64 },

    #[error("lattice ranks differ ({outer} vs {inner}); the index is not finite")]
    RankMismatch { outer: usize, inner: usize },

    #[error("line `{label}` carries no certified metric")]
    MissingMetric { label: String },

    #[error("working precision exhausted: {context}")]
    PrecisionExhausted { context: String },

    #[error("target vector is zero")]
    ZeroVector,

    #[error("filtration window [{a}, {b}) has length {len} > p - 1 = {}", p - 1)]
    WindowTooWide { a: i64, b: i64, len: i64, p: u64 },

    #[error("Hodge structure is not pure: {detail}")]
    NotPure { detail: String },

    #[error("filtration is not nested at index {index}")]
    NotNested { index: i64 },

    #[error("filtration step {index} is not saturated at p = {p}")]
    NotSaturated { index: i64, p: u64 },

    #[error("strong divisibility fails at p = {p}")]
    StrongDivisibility { p: u64 },

    #[error("strong divisibility lost after sublattice construction at p = {p}")]
    StrongDivisibilityLost { p: u64 },

    #[error("quotient specification is incompatible: {detail}")]
    IncompatibleSpec { detail: String },

    #[error("weights differ ({0} vs {1})")]
    WeightMismatch(i64, i64),

    #[error("windows differ ({0:?} vs {1:?})")]
    WindowMismatch((i64, i64), (i64, i64)),

    #[error("periods are degenerate: omega2/omega1 is not certified non-real")]
    DegeneratePeriods,

    #[error("{0} is not a prime")]
    NotPrime(u64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular: {0}")]
    Singular(String),

    #[error("invalid data: {0}")]
    Invalid(String),
}
