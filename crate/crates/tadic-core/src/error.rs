use thiserror::Error;

/// Library-wide error type. Every refusal carries enough context to act on:
/// budget errors state the exact required count, precision errors state the
/// demand, precondition errors name the violated assumption.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("{what}: {detail}")]
    Precondition { what: &'static str, detail: String },

    #[error("exponent {a} lies outside the cone of the interval")]
    OutsideCone { a: i64 },

    #[error("budget exceeded: {formula} = {required} point evaluations > budget {budget}")]
    Budget {
        required: u64,
        budget: u64,
        formula: String,
    },

    #[error("insufficient precision: need {needed}, have {have} ({what})")]
    InsufficientPrecision {
        what: &'static str,
        needed: u64,
        have: u64,
    },

    #[error("truncation shortfall: degree bound must be at least {min_bound}")]
    TruncationShortfall { min_bound: u32 },

    #[error("slope member set at turning point m={m} has {found} members, expected {m}")]
    SlopeSetCardinality { m: usize, found: usize },

    #[error("integrality failure at coefficient index {index}: denominator {denominator} remains")]
    Integrality { index: usize, denominator: String },

    #[error("degree overflow: coefficient {index} is nonzero beyond the expected degree {degree}")]
    DegreeOverflow { index: usize, degree: usize },

    #[error("property violation: {0}")]
    Property(String),

    #[error("inconclusive: {0}")]
    Inconclusive(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

impl Error {
    /// Process exit code contract: 1 property violation, 2 budget refusal,
    /// 3 precondition or precision failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Property(_) => 1,
            Error::Budget { .. } => 2,
            _ => 3,
        }
    }
}
