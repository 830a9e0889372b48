//! Periodic continued fractions of `sqrt(d)`.
//!
//! The tail of the expansion after `j` partial quotients is the reduced
//! surd `(P_j + sqrt(d)) / Q_j`. Starting from `(P_0, Q_0) = (0, 1)` the
//! integer recurrence
//!
//! ```text
//! a_j     = floor((P_j + n) / Q_j)          n = floor(sqrt(d))
//! P_{j+1} = a_j Q_j - P_j
//! Q_{j+1} = (d - P_{j+1}^2) / Q_j           (exact)
//! ```
//!
//! produces every partial quotient without leaving `u64`: for `j >= 1` the
//! state satisfies `1 <= P_j <= n` and `1 <= Q_j <= 2n`.
//!
//! The period `a_1, ..., a_l` is a palindrome in its first `l - 1` terms and
//! ends in `2n`. The palindrome shows up in the states as well: an even
//! period has `P_{l/2} = P_{l/2 + 1}`, an odd one `Q_{(l-1)/2} = Q_{(l+1)/2}`.
//! [`detect_half_period`] stops at that point, which is half the work of a
//! full expansion.

use crate::error::{Error, Result};
use crate::primes::isqrt;

/// Radicands must be strictly below this bound.
pub const MAX_RADICAND: u64 = 1 << 62;

/// One tail `(P + sqrt(d)) / Q` of the expansion of `sqrt(d)`, together
/// with the partial quotient it emits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SurdState {
    d: u64,
    root: u64,
    index: u64,
    p: u64,
    q: u64,
    a: u64,
}

/// Parity of a period length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

fn checked_root(d: u64) -> Result<u64> {
    if d < 2 {
        return Err(Error::DomainTooSmall(d));
    }
    if d >= MAX_RADICAND {
        return Err(Error::Overflow("radicand must be below 2^62"));
    }
    let root = isqrt(d);
    if root * root == d {
        return Err(Error::PerfectSquare(d));
    }
    Ok(root)
}

impl SurdState {
    /// The state at index 0: `P = 0`, `Q = 1`, `a = floor(sqrt(d))`.
    pub fn init(d: u64) -> Result<Self> {
        let root = checked_root(d)?;
        Ok(SurdState {
            d,
            root,
            index: 0,
            p: 0,
            q: 1,
            a: root,
        })
    }

    /// Builds a state from its `(P, Q)` pair, checking `Q | d - P^2` and
    /// the reduced-surd bounds.
    pub fn from_parts(d: u64, index: u64, p: u64, q: u64) -> Result<Self> {
        let root = checked_root(d)?;
        let invalid = Error::InvalidSurdState { d, p, q };
        if q == 0 || p > root || q > 2 * root {
            return Err(invalid);
        }
        if index >= 1 && p == 0 {
            return Err(invalid);
        }
        if (d - p * p) % q != 0 {
            return Err(invalid);
        }
        Ok(SurdState {
            d,
            root,
            index,
            p,
            q,
            a: (p + root) / q,
        })
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    /// `floor(sqrt(d))`.
    pub fn root(&self) -> u64 {
        self.root
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Partial quotient emitted at this state.
    pub fn a(&self) -> u64 {
        self.a
    }

    /// `P` of the following state, without building it.
    #[inline]
    fn next_p(&self) -> Result<u64> {
        self.a
            .checked_mul(self.q)
            .and_then(|aq| aq.checked_sub(self.p))
            .ok_or(Error::Overflow("a*Q - P"))
    }

    /// Advances one partial quotient.
    pub fn step(&self) -> Result<Self> {
        let p = self.next_p()?;
        let sq = p.checked_mul(p).ok_or(Error::Overflow("P^2"))?;
        let num = self.d.checked_sub(sq).ok_or(Error::Overflow("d - P^2"))?;
        if num % self.q != 0 {
            return Err(Error::Internal(format!(
                "inexact Q division at index {} of sqrt({})",
                self.index, self.d
            )));
        }
        let q = num / self.q;
        if q == 0 {
            return Err(Error::Internal(format!("Q vanished for sqrt({})", self.d)));
        }
        Ok(SurdState {
            d: self.d,
            root: self.root,
            index: self.index + 1,
            p,
            q,
            a: (p + self.root) / q,
        })
    }

    /// Reports whether this state sits at the midpoint of the period.
    ///
    /// `Some(Even)` when `P_j = P_{j+1}` (so `l = 2j`), `Some(Odd)` when
    /// `Q_j = Q_{j+1}` (so `l = 2j + 1`). Only the first hit along an
    /// expansion is meaningful.
    pub fn midpoint(&self) -> Result<Option<Parity>> {
        let next_p = self.next_p()?;
        if self.index >= 1 && next_p == self.p {
            return Ok(Some(Parity::Even));
        }
        // Q_{j+1} = Q_j  <=>  d - P_{j+1}^2 = Q_j^2
        if self.d - next_p * next_p == self.q * self.q {
            return Ok(Some(Parity::Odd));
        }
        Ok(None)
    }
}

pub fn surd_init(d: u64) -> Result<SurdState> {
    SurdState::init(d)
}

pub fn surd_step(s: &SurdState) -> Result<SurdState> {
    s.step()
}

/// The periodic expansion `sqrt(d) = <n; a_1, ..., a_l>` (the bar over the
/// period is implied).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CfExpansion {
    pub d: u64,
    /// `floor(sqrt(d))`, the integer part `a_0`.
    pub root: u64,
    /// `a_1, ..., a_l`.
    pub period: Vec<u64>,
}

impl CfExpansion {
    /// Expands `sqrt(d)` with a guard that no valid input can hit.
    pub fn of(d: u64) -> Result<Self> {
        // At most n * 2n distinct reduced states exist.
        let guard = usize::try_from(2u128 * d as u128).unwrap_or(usize::MAX);
        expand_sqrt(d, guard)
    }

    /// Period length `l`.
    pub fn len(&self) -> usize {
        self.period.len()
    }

    pub fn is_empty(&self) -> bool {
        self.period.is_empty()
    }

    /// `a_i` for any `i >= 0`, cycling through the period.
    pub fn term(&self, i: usize) -> u64 {
        if i == 0 {
            self.root
        } else {
            self.period[(i - 1) % self.period.len()]
        }
    }

    /// The middle term `a_{l/2}` of an even period.
    pub fn central(&self) -> Option<u64> {
        let l = self.len();
        (l % 2 == 0).then(|| self.period[l / 2 - 1])
    }

    /// Checks the shape every expansion of a square root must have: the
    /// period ends in `2n`, the first `l - 1` terms read the same
    /// backwards, and every earlier term is at most `n`.
    pub fn has_canonical_shape(&self) -> bool {
        let l = self.len();
        if l == 0 || self.period[l - 1] != 2 * self.root {
            return false;
        }
        let body = &self.period[..l - 1];
        body.iter().eq(body.iter().rev()) && body.iter().all(|&a| a >= 1 && a <= self.root)
    }
}

impl std::fmt::Display for CfExpansion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<{}; ", self.root)?;
        for (i, a) in self.period.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{a}")?;
        }
        f.write_str(">")
    }
}

/// Full period of `sqrt(d)`, failing once more than `max_terms` partial
/// quotients would be needed.
pub fn expand_sqrt(d: u64, max_terms: usize) -> Result<CfExpansion> {
    let start = SurdState::init(d)?.step()?;
    let mut period = Vec::new();
    let mut state = start;
    loop {
        if period.len() == max_terms {
            return Err(Error::PeriodGuardExceeded { max_terms });
        }
        period.push(state.a);
        state = state.step()?;
        if (state.p, state.q) == (start.p, start.q) {
            break;
        }
    }
    Ok(CfExpansion {
        d,
        root: start.root,
        period,
    })
}

/// Result of a midpoint search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HalfPeriod {
    /// Period length `l`.
    pub len: usize,
    pub parity: Parity,
    /// `j` with `l = 2j` (even) or `l = 2j + 1` (odd).
    pub mid: usize,
}

/// Period length and parity of `sqrt(d)` from the midpoint symmetry,
/// visiting only about half of the period.
pub fn detect_half_period(d: u64) -> Result<HalfPeriod> {
    let mut state = SurdState::init(d)?;
    loop {
        if let Some(parity) = state.midpoint()? {
            let mid = state.index as usize;
            let len = match parity {
                Parity::Even => 2 * mid,
                Parity::Odd => 2 * mid + 1,
            };
            return Ok(HalfPeriod { len, parity, mid });
        }
        state = state.step()?;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::primes::{is_prime, primes_up_to};
    use proptest::prelude::*;

    fn pq(s: &SurdState) -> (u64, u64, u64) {
        (s.p(), s.q(), s.a())
    }

    #[test]
    fn init_examples() {
        let s = surd_init(7).unwrap();
        assert_eq!((s.index(), s.p(), s.q(), s.a()), (0, 0, 1, 2));
        let s = surd_init(2).unwrap();
        assert_eq!((s.index(), s.p(), s.q(), s.a()), (0, 0, 1, 1));
        assert_eq!(surd_init(9), Err(Error::PerfectSquare(9)));
        assert_eq!(surd_init(1), Err(Error::DomainTooSmall(1)));
        assert_eq!(surd_init(0), Err(Error::DomainTooSmall(0)));
        assert!(matches!(surd_init(1 << 62), Err(Error::Overflow(_))));
        assert!(surd_init((1 << 62) - 1).is_ok());
    }

    #[test]
    fn step_examples() {
        let s0 = surd_init(7).unwrap();
        let s1 = surd_step(&s0).unwrap();
        assert_eq!(pq(&s1), (2, 3, 1));
        let s2 = surd_step(&s1).unwrap();
        assert_eq!(pq(&s2), (1, 2, 1));
        assert_eq!(s2.index(), 2);

        let s = SurdState::from_parts(13, 1, 3, 4).unwrap();
        assert_eq!(pq(&surd_step(&s).unwrap()), (1, 3, 1));
    }

    #[test]
    fn from_parts_rejects_bad_states() {
        assert!(SurdState::from_parts(13, 1, 3, 5).is_err()); // 5 does not divide 4
        assert!(SurdState::from_parts(13, 1, 4, 1).is_err()); // P > n
        assert!(SurdState::from_parts(13, 1, 3, 0).is_err());
    }

    #[test]
    fn steps_near_the_width_limit() {
        let d = (1u64 << 62) - 57;
        let mut s = surd_init(d).unwrap();
        for _ in 0..1000 {
            s = s.step().unwrap();
            assert!(s.p() <= s.root() && s.q() <= 2 * s.root());
        }
    }

    #[test]
    fn expansion_examples() {
        let e = expand_sqrt(10017223, 100).unwrap();
        assert_eq!((e.root, e.period.clone(), e.len()), (3164, vec![1, 3163, 1, 6328], 4));
        let e = expand_sqrt(3, 10).unwrap();
        assert_eq!((e.root, e.period.clone()), (1, vec![1, 2]));
        let e = expand_sqrt(19, 10).unwrap();
        assert_eq!((e.root, e.period.clone()), (4, vec![2, 1, 3, 1, 2, 8]));
        let e = expand_sqrt(107, 10).unwrap();
        assert_eq!((e.root, e.period.clone()), (10, vec![2, 1, 9, 1, 2, 20]));
        let e = expand_sqrt(2, 10).unwrap();
        assert_eq!(e.period, vec![2]);
        assert_eq!(e.to_string(), "<1; 2>");
    }

    #[test]
    fn expansion_guard() {
        assert_eq!(
            expand_sqrt(19, 5),
            Err(Error::PeriodGuardExceeded { max_terms: 5 })
        );
        assert!(expand_sqrt(19, 6).is_ok());
        assert_eq!(expand_sqrt(16, 6), Err(Error::PerfectSquare(16)));
    }

    #[test]
    fn half_period_examples() {
        assert_eq!(
            detect_half_period(7).unwrap(),
            HalfPeriod { len: 4, parity: Parity::Even, mid: 2 }
        );
        assert_eq!(
            detect_half_period(3).unwrap(),
            HalfPeriod { len: 2, parity: Parity::Even, mid: 1 }
        );
        assert_eq!(
            detect_half_period(13).unwrap(),
            HalfPeriod { len: 5, parity: Parity::Odd, mid: 2 }
        );
        // l = 1 has its symmetry already between index 0 and 1.
        assert_eq!(
            detect_half_period(2).unwrap(),
            HalfPeriod { len: 1, parity: Parity::Odd, mid: 0 }
        );
    }

    #[test]
    fn half_period_matches_full_expansion() {
        for d in 2..=100_000u64 {
            let r = isqrt(d);
            if r * r == d {
                continue;
            }
            let e = CfExpansion::of(d).unwrap();
            assert!(e.has_canonical_shape(), "d = {d}: {e}");
            assert_eq!(detect_half_period(d).unwrap().len, e.len(), "d = {d}");
        }
    }

    #[test]
    fn period_length_congruences_for_primes() {
        for p in primes_up_to(100_000).into_iter().filter(|p| p % 4 == 3) {
            let l = detect_half_period(p).unwrap().len;
            assert_eq!(l % 2, 0, "p = {p}");
            match p % 8 {
                3 => assert_eq!(l % 4, 2, "p = {p}"),
                7 => assert_eq!(l % 4, 0, "p = {p}"),
                _ => unreachable!(),
            }
        }
    }

    #[test]
    fn central_term() {
        assert_eq!(CfExpansion::of(19).unwrap().central(), Some(3));
        assert_eq!(CfExpansion::of(13).unwrap().central(), None);
        assert_eq!(CfExpansion::of(19).unwrap().term(7), 2);
    }

    proptest! {
        #[test]
        fn states_stay_reduced(d in 2u64..(1 << 40)) {
            prop_assume!({ let r = isqrt(d); r * r != d });
            let mut s = surd_init(d).unwrap();
            for _ in 0..200 {
                s = s.step().unwrap();
                prop_assert_eq!((d - s.p() * s.p()) % s.q(), 0);
                prop_assert!(s.p() >= 1 && s.p() <= s.root());
                prop_assert!(s.q() >= 1 && s.q() <= 2 * s.root());
                prop_assert!(s.a() >= 1);
            }
        }

        #[test]
        fn primes_have_palindromic_periods(start in 3u64..2_000_000) {
            let p = (start..).find(|&n| is_prime(n)).unwrap();
            let e = CfExpansion::of(p).unwrap();
            prop_assert!(e.has_canonical_shape());
        }
    }
}
