//! Continued fractions of square roots, fundamental Pell solutions, and a
//! half-period verifier for Mordell's conjecture on `x^2 - p y^2 = 1`.
//!
//! ```
//! use mordell::{cf_surd::CfExpansion, pell_unit::fundamental_solution};
//!
//! let e = CfExpansion::of(19).unwrap();
//! assert_eq!(e.to_string(), "<4; 2, 1, 3, 1, 2, 8>");
//!
//! let s = fundamental_solution(19).unwrap();
//! assert_eq!(s.to_string(), "170 + 39*sqrt(19)");
//! ```
//!
//! The guide under `book/` walks through each module; its code blocks are
//! compiled and run as doctests of this crate.

pub mod cf_surd;
pub mod convergents;
pub mod error;
pub mod harness;
pub mod mordell_verify;
pub mod pell_unit;
pub mod primes;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/continued-fractions.md")]
    mod continued_fractions {}
    #[doc = include_str!("../../../book/src/convergents.md")]
    mod convergents {}
    #[doc = include_str!("../../../book/src/pell-units.md")]
    mod pell_units {}
    #[doc = include_str!("../../../book/src/half-period-criterion.md")]
    mod half_period_criterion {}
    #[doc = include_str!("../../../book/src/verification-runs.md")]
    mod verification_runs {}
}
