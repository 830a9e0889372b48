//! Convergents `k_i / h_i` of `sqrt(d)`.
//!
//! Both sequences follow `h_{i+1} = a_{i+1} h_i + h_{i-1}` from the seeds
//! `h_{-1} = 0, h_0 = 1` and `k_{-1} = 1, k_0 = n`. The exact stream keeps
//! the whole prefix as big integers; the modular stream keeps two residues.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::cf_surd::{CfExpansion, SurdState};
use crate::error::{Error, Result};

/// Moduli must be strictly below this bound.
pub const MAX_MODULUS: u64 = 1 << 62;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConvergentPair {
    pub index: i64,
    /// Denominator `h_i`.
    pub h: BigUint,
    /// Numerator `k_i`.
    pub k: BigUint,
}

/// Exact pairs `(h_i, k_i)` for `i = -1..=upto` within the first period.
pub fn convergent_stream(exp: &CfExpansion, upto: usize) -> Result<Vec<ConvergentPair>> {
    let l = exp.len();
    if upto >= l {
        return Err(Error::IndexOutOfRange {
            index: upto as i64,
            lo: 0,
            hi: l as i64 - 1,
        });
    }
    let mut pairs = Vec::with_capacity(upto + 2);
    pairs.push(ConvergentPair {
        index: -1,
        h: BigUint::zero(),
        k: BigUint::one(),
    });
    pairs.push(ConvergentPair {
        index: 0,
        h: BigUint::one(),
        k: BigUint::from(exp.root),
    });
    for i in 1..=upto {
        let a = exp.term(i);
        let (prev, cur) = (&pairs[i - 1], &pairs[i]);
        let next = ConvergentPair {
            index: i as i64,
            h: &cur.h * a + &prev.h,
            k: &cur.k * a + &prev.k,
        };
        pairs.push(next);
    }
    Ok(pairs)
}

/// `h_i` out of a stream produced by [`convergent_stream`].
pub fn h_at(pairs: &[ConvergentPair], i: i64) -> Option<&BigUint> {
    let first = pairs.first()?.index;
    let pos = usize::try_from(i - first).ok()?;
    pairs.get(pos).filter(|p| p.index == i).map(|p| &p.h)
}

/// `k_i` out of a stream produced by [`convergent_stream`].
pub fn k_at(pairs: &[ConvergentPair], i: i64) -> Option<&BigUint> {
    let first = pairs.first()?.index;
    let pos = usize::try_from(i - first).ok()?;
    pairs.get(pos).filter(|p| p.index == i).map(|p| &p.k)
}

/// `a * h + c (mod m)` for residues below `m < 2^62`.
#[inline]
pub fn mul_add_mod(a: u64, h: u64, c: u64, m: u64) -> u64 {
    match a.checked_mul(h).and_then(|x| x.checked_add(c)) {
        Some(x) => x % m,
        None => ((a as u128 * h as u128 + c as u128) % m as u128) as u64,
    }
}

/// Rolling pair `(h_{i-1}, h_i)` reduced modulo `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModConvergentState {
    pub modulus: u64,
    pub index: i64,
    pub h_prev: u64,
    pub h_cur: u64,
}

impl ModConvergentState {
    /// The state at index 0: `h_{-1} = 0`, `h_0 = 1`.
    pub fn new(modulus: u64) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidModulus(modulus));
        }
        if modulus >= MAX_MODULUS {
            return Err(Error::Overflow("modulus must be below 2^62"));
        }
        Ok(ModConvergentState {
            modulus,
            index: 0,
            h_prev: 0,
            h_cur: 1,
        })
    }

    /// Absorbs the next partial quotient `a_{i+1}`.
    #[inline]
    pub fn push(&mut self, a: u64) {
        let next = mul_add_mod(a % self.modulus, self.h_cur, self.h_prev, self.modulus);
        self.h_prev = self.h_cur;
        self.h_cur = next;
        self.index += 1;
    }
}

/// `h_{upto-1}` and `h_upto` of `sqrt(d)` modulo `m`, driven directly by
/// the surd recurrence. Indices past the first period simply keep cycling.
pub fn convergent_mod_stream(d: u64, m: u64, upto: u64) -> Result<ModConvergentState> {
    let mut acc = ModConvergentState::new(m)?;
    let mut state = SurdState::init(d)?;
    for _ in 0..upto {
        state = state.step()?;
        acc.push(state.a());
    }
    Ok(acc)
}

/// Checks `k_i h_{i-1} - k_{i-1} h_i = (-1)^(i-1)` across a stream.
///
/// The stream must hold consecutive indices; any gap fails the check.
pub fn check_wronskian(pairs: &[ConvergentPair]) -> bool {
    pairs.windows(2).all(|w| {
        let (prev, cur) = (&w[0], &w[1]);
        if cur.index != prev.index + 1 {
            return false;
        }
        if cur.index < 0 {
            return true;
        }
        let lhs = BigInt::from(&cur.k * &prev.h) - BigInt::from(&prev.k * &cur.h);
        let rhs = if (cur.index - 1).rem_euclid(2) == 0 { 1 } else { -1 };
        lhs == BigInt::from(rhs)
    })
}

/// Checks `h_{l-1} = h_i h_{l-1-i} + h_{i-1} h_{l-2-i}` for one split
/// point `0 <= i <= l - 2`.
pub fn palindromic_split(exp: &CfExpansion, pairs: &[ConvergentPair], i: usize) -> Result<bool> {
    let l = exp.len() as i64;
    let i = i as i64;
    if l < 2 || i > l - 2 {
        return Err(Error::IndexOutOfRange {
            index: i,
            lo: 0,
            hi: l - 2,
        });
    }
    let h = |j: i64| {
        h_at(pairs, j).ok_or(Error::IndexOutOfRange {
            index: j,
            lo: -1,
            hi: pairs.last().map_or(-1, |p| p.index),
        })
    };
    let rhs = h(i)? * h(l - 1 - i)? + h(i - 1)? * h(l - 2 - i)?;
    Ok(*h(l - 1)? == rhs)
}
