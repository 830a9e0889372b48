//! Fundamental Pell solutions and the unit decomposition for `p ≡ 3 (mod 4)`.
//!
//! The fundamental solution of `x^2 - d y^2 = ±1` is read off the last
//! convergent of the first period, `(k_{l-1}, h_{l-1})`, and its norm is
//! `(-1)^l`. For a prime `p ≡ 3 (mod 4)` the period is even and the norm is
//! `+1`; factoring `(x + 1)(x - 1) = p y^2` gives `y = a b` with
//! `a^2 - p b^2 = ±2`, the sign being `-` exactly when `p ≡ 3 (mod 8)`.
//! Both factors are also visible at the half period:
//! `a = h_{l/2} + h_{l/2-2}` and `b = h_{l/2-1}`.

use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::cf_surd::{CfExpansion, SurdState};
use crate::convergents::{convergent_stream, h_at, k_at, ModConvergentState};
use crate::error::{Error, Result};
use crate::primes::is_prime;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Norm {
    Plus,
    Minus,
}

impl Norm {
    pub fn value(self) -> i32 {
        match self {
            Norm::Plus => 1,
            Norm::Minus => -1,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Norm::Plus => "+1",
            Norm::Minus => "-1",
        })
    }
}

/// Minimal positive `(x, y)` with `x^2 - d y^2 = norm`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PellSolution {
    pub d: u64,
    pub x: BigUint,
    pub y: BigUint,
    pub norm: Norm,
}

impl PellSolution {
    /// Evaluates `x^2 - d y^2` exactly.
    pub fn evaluate(&self) -> BigInt {
        BigInt::from(&self.x * &self.x) - BigInt::from(&self.y * &self.y * self.d)
    }
}

impl fmt::Display for PellSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}*sqrt({})", self.x, self.y, self.d)
    }
}

/// `y = a b` with `a^2 - p b^2 = epsilon`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UnitDecomposition {
    pub p: u64,
    pub a: BigUint,
    pub b: BigUint,
    /// `-2` when `p ≡ 3 (mod 8)`, `+2` when `p ≡ 7 (mod 8)`.
    pub epsilon: i32,
}

/// Square root of `x` if `x` is a perfect square.
pub fn exact_sqrt(x: &BigUint) -> Option<BigUint> {
    let r = x.sqrt();
    let next = &r + 1u32;
    // root^2 <= x < (root + 1)^2 pins the floor; then test exactness
    if &r * &r > *x || &next * &next <= *x {
        return None;
    }
    (&r * &r == *x).then_some(r)
}

/// `(k_{l-1}, h_{l-1})` with norm `(-1)^l`.
pub fn fundamental_solution(d: u64) -> Result<PellSolution> {
    let exp = CfExpansion::of(d)?;
    solution_from_expansion(&exp)
}

pub(crate) fn solution_from_expansion(exp: &CfExpansion) -> Result<PellSolution> {
    let l = exp.len();
    let pairs = convergent_stream(exp, l - 1)?;
    let last = &pairs[l];
    Ok(PellSolution {
        d: exp.d,
        x: last.k.clone(),
        y: last.h.clone(),
        norm: if l % 2 == 0 { Norm::Plus } else { Norm::Minus },
    })
}

fn require_3_mod_4(p: u64) -> Result<()> {
    if p % 4 != 3 {
        return Err(Error::NotCongruent3Mod4(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

pub fn decompose_unit(p: u64, sol: &PellSolution) -> Result<UnitDecomposition> {
    require_3_mod_4(p)?;
    if sol.d != p {
        return Err(Error::RadicandMismatch {
            expected: p,
            found: sol.d,
        });
    }
    if sol.norm != Norm::Plus {
        return Err(Error::NegativeNorm);
    }
    let inexact = || Error::InexactSquareRoot(p);
    let big_p = BigUint::from(p);
    let x_plus = &sol.x + 1u32;
    if sol.x.is_zero() {
        return Err(inexact());
    }
    let x_minus = &sol.x - 1u32;
    // x - 1 = a^2, x + 1 = p b^2 when p ≡ 3 (mod 8); swapped when p ≡ 7.
    let (square_part, p_part, epsilon) = if p % 8 == 3 {
        (x_minus, x_plus, -2)
    } else {
        (x_plus, x_minus, 2)
    };
    let (quot, rem) = p_part.div_rem(&big_p);
    if !rem.is_zero() {
        return Err(inexact());
    }
    let a = exact_sqrt(&square_part).ok_or_else(inexact)?;
    let b = exact_sqrt(&quot).ok_or_else(inexact)?;

    let dec = UnitDecomposition { p, a, b, epsilon };
    let norm = BigInt::from(&dec.a * &dec.a) - BigInt::from(&dec.b * &dec.b * p);
    let consistent = norm == BigInt::from(epsilon)
        && dec.a.is_odd()
        && dec.b.is_odd()
        && dec.a.gcd(&dec.b).is_one()
        && &dec.a * &dec.b == sol.y;
    if !consistent {
        return Err(Error::Internal(format!(
            "unit decomposition for p = {p} violates its invariants"
        )));
    }
    Ok(dec)
}

/// Checks that the half-period convergents reproduce the unit
/// decomposition: `a = c`, `b = h_{l/2-1}`, `gcd(h_{l/2-1}, c) = 1` and
/// `c^2 - p h_{l/2-1}^2 = epsilon`, where `c = h_{l/2} + h_{l/2-2}`.
pub fn verify_half_identities(p: u64) -> Result<bool> {
    require_3_mod_4(p)?;
    let exp = CfExpansion::of(p)?;
    let l = exp.len();
    if l % 2 != 0 {
        return Err(Error::Internal(format!("odd period for p = {p}")));
    }
    let pairs = convergent_stream(&exp, l - 1)?;
    let half = (l / 2) as i64;
    let h = |i: i64| h_at(&pairs, i).cloned().expect("index inside the first period");
    let b_half = h(half - 1);
    let c_half = h(half) + h(half - 2);

    let sol = PellSolution {
        d: p,
        x: k_at(&pairs, l as i64 - 1).cloned().expect("last convergent"),
        y: h(l as i64 - 1),
        norm: Norm::Plus,
    };
    let dec = decompose_unit(p, &sol)?;
    let norm = BigInt::from(&c_half * &c_half) - BigInt::from(&b_half * &b_half * p);
    Ok(dec.a == c_half
        && dec.b == b_half
        && b_half.gcd(&c_half).is_one()
        && norm == BigInt::from(dec.epsilon))
}

/// The central term `a_{l/2}` is odd and equals `n` or `n - 1`.
pub fn central_term_law(p: u64) -> Result<bool> {
    require_3_mod_4(p)?;
    let exp = CfExpansion::of(p)?;
    Ok(match exp.central() {
        Some(c) => c % 2 == 1 && (c == exp.root || c + 1 == exp.root),
        None => false,
    })
}

/// `h_{l-1} mod p` for a prime `p ≡ 1 (mod 4)`, computed with residues
/// only over the full (odd) period.
///
/// Zero exactly when `p` divides the `y` of the fundamental solution of
/// `x^2 - p y^2 = -1`.
pub fn aac_y_mod_p(p: u64) -> Result<u64> {
    if p % 4 != 1 {
        return Err(Error::NotCongruent1Mod4(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(full_period_walk(p, p)?.0)
}

/// Walks one full period of `sqrt(d)` with residues mod `m`; returns
/// `h_{l-1} mod m` and `l`. The period closes at the first `Q = 1` past
/// index 0, where `a_l = 2n` is emitted.
pub(crate) fn full_period_walk(d: u64, m: u64) -> Result<(u64, usize)> {
    let mut acc = ModConvergentState::new(m)?;
    let mut state = SurdState::init(d)?.step()?;
    let mut l = 1;
    while state.q() != 1 {
        acc.push(state.a());
        state = state.step()?;
        l += 1;
    }
    Ok((acc.h_cur, l))
}
