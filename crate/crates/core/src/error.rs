use thiserror::Error;

/// Errors raised by the number-theoretic routines.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is a perfect square; its square root has no periodic expansion")]
    PerfectSquare(u64),
    #[error("radicand {0} is below 2")]
    DomainTooSmall(u64),
    #[error("arithmetic overflow: {0}")]
    Overflow(&'static str),
    #[error("({p}, {q}) is not a valid surd state for radicand {d}")]
    InvalidSurdState { d: u64, p: u64, q: u64 },
    #[error("period exceeds the guard of {max_terms} terms")]
    PeriodGuardExceeded { max_terms: usize },
    #[error("index {index} outside the admissible range {lo}..={hi}")]
    IndexOutOfRange { index: i64, lo: i64, hi: i64 },
    #[error("modulus {0} must be at least 2")]
    InvalidModulus(u64),
    #[error("{0} is not congruent to 3 mod 4")]
    NotCongruent3Mod4(u64),
    #[error("{0} is not congruent to 1 mod 4")]
    NotCongruent1Mod4(u64),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("solution belongs to radicand {found}, expected {expected}")]
    RadicandMismatch { expected: u64, found: u64 },
    #[error("unit has norm -1; a norm +1 solution is required")]
    NegativeNorm,
    #[error("inexact square root while decomposing the unit for p = {0}")]
    InexactSquareRoot(u64),
    #[error("range [{lo}, {hi}) is too large to sieve")]
    RangeTooLarge { lo: u64, hi: u64 },
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
