//! Per-prime verification of Mordell's conjecture and of the
//! Ankeny–Artin–Chowla conjecture.
//!
//! For a prime `p ≡ 3 (mod 4)` with fundamental solution `(x, y)` of
//! `x^2 - p y^2 = 1`, `p | y` holds if and only if `p | h_{l/2-1}`. The fast
//! path therefore walks half a period with residues mod `p` and never
//! builds the (exponentially large) solution. The full path computes `y`
//! exactly and reduces it; the two are run side by side as a cross-check.

use std::fmt;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::cf_surd::{CfExpansion, Parity, SurdState};
use crate::convergents::ModConvergentState;
use crate::error::{Error, Result};
use crate::pell_unit::{central_term_law, full_period_walk, solution_from_expansion};
use crate::primes::is_prime;

/// Primes `> 10^7` of the form `(n+1)^2 - 2` used as published examples of
/// period-4 primes; the harness always runs the exact path on them.
pub const TABLE_PRIMES: [u64; 4] = [10017223, 20948927, 21003887, 21022223];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fast,
    Full,
    Both,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Fast => "fast",
            Method::Full => "full",
            Method::Both => "both",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    #[serde(rename = "holds")]
    Holds,
    #[serde(rename = "COUNTEREXAMPLE")]
    Counterexample,
}

impl Verdict {
    fn from_witness(w: u64) -> Self {
        if w == 0 {
            Verdict::Counterexample
        } else {
            Verdict::Holds
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Counterexample => "COUNTEREXAMPLE",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which conjecture a run checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `p ≡ 3 (mod 4)`, witness `h_{l/2-1} mod p`.
    Mordell,
    /// `p ≡ 1 (mod 4)`, witness `h_{l-1} mod p`.
    Aac,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Mordell => "mordell",
            Mode::Aac => "aac",
        }
    }
}

/// Outcome for one prime.
///
/// `witness_residue` is `h_{l/2-1} mod p` (Mordell) or `h_{l-1} mod p`
/// (A-A-C) whenever the fast path ran, and `y mod p` for a full-only
/// record. `central` is `a_{l/2}` in Mordell mode and 0 otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub p: u64,
    pub p_mod_8: u8,
    pub period_len: u64,
    pub central: u64,
    pub witness_residue: u64,
    pub method: Method,
    pub verdict: Verdict,
}

/// Bookkeeping of a half-period walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfWalk {
    /// Number of surd steps taken from the index-0 state.
    pub steps: u64,
    pub period_len: u64,
    pub central: u64,
    /// `h_{l/2-1} mod p`.
    pub witness: u64,
}

fn require_prime_3_mod_4(p: u64) -> Result<()> {
    if p % 4 != 3 {
        return Err(Error::NotCongruent3Mod4(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

fn require_prime_1_mod_4(p: u64) -> Result<()> {
    if p % 4 != 1 {
        return Err(Error::NotCongruent1Mod4(p));
    }
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    Ok(())
}

/// Walks to the midpoint `P_j = P_{j+1}` carrying `h mod p`; `l = 2j`.
pub fn half_period_walk(p: u64) -> Result<HalfWalk> {
    require_prime_3_mod_4(p)?;
    let mut h = ModConvergentState::new(p)?;
    let mut state = SurdState::init(p)?;
    let mut steps = 0;
    loop {
        state = state.step()?;
        steps += 1;
        match state.midpoint()? {
            Some(Parity::Even) => break,
            Some(Parity::Odd) => {
                return Err(Error::Internal(format!(
                    "odd period detected for p = {p} ≡ 3 (mod 4)"
                )))
            }
            None => h.push(state.a()),
        }
    }
    Ok(HalfWalk {
        steps,
        period_len: 2 * state.index(),
        central: state.a(),
        witness: h.h_cur,
    })
}

pub fn mordell_fast(p: u64) -> Result<VerificationRecord> {
    let walk = half_period_walk(p)?;
    Ok(VerificationRecord {
        p,
        p_mod_8: (p % 8) as u8,
        period_len: walk.period_len,
        central: walk.central,
        witness_residue: walk.witness,
        method: Method::Fast,
        verdict: Verdict::from_witness(walk.witness),
    })
}

fn reduce(y: &BigUint, p: u64) -> u64 {
    u64::try_from(y % p).expect("residue below a u64 modulus")
}

pub fn mordell_full(p: u64) -> Result<VerificationRecord> {
    require_prime_3_mod_4(p)?;
    let exp = CfExpansion::of(p)?;
    let sol = solution_from_expansion(&exp)?;
    let witness = reduce(&sol.y, p);
    Ok(VerificationRecord {
        p,
        p_mod_8: (p % 8) as u8,
        period_len: exp.len() as u64,
        central: exp.central().unwrap_or(0),
        witness_residue: witness,
        method: Method::Full,
        verdict: Verdict::from_witness(witness),
    })
}

pub fn aac_fast(p: u64) -> Result<VerificationRecord> {
    require_prime_1_mod_4(p)?;
    let (witness, l) = full_period_walk(p, p)?;
    Ok(VerificationRecord {
        p,
        p_mod_8: (p % 8) as u8,
        period_len: l as u64,
        central: 0,
        witness_residue: witness,
        method: Method::Fast,
        verdict: Verdict::from_witness(witness),
    })
}

pub fn aac_full(p: u64) -> Result<VerificationRecord> {
    require_prime_1_mod_4(p)?;
    let exp = CfExpansion::of(p)?;
    let sol = solution_from_expansion(&exp)?;
    let witness = reduce(&sol.y, p);
    Ok(VerificationRecord {
        p,
        p_mod_8: (p % 8) as u8,
        period_len: exp.len() as u64,
        central: 0,
        witness_residue: witness,
        method: Method::Full,
        verdict: Verdict::from_witness(witness),
    })
}

pub fn verify_fast(mode: Mode, p: u64) -> Result<VerificationRecord> {
    match mode {
        Mode::Mordell => mordell_fast(p),
        Mode::Aac => aac_fast(p),
    }
}

pub fn verify_full(mode: Mode, p: u64) -> Result<VerificationRecord> {
    match mode {
        Mode::Mordell => mordell_full(p),
        Mode::Aac => aac_full(p),
    }
}

/// Merges a fast and a full record for the same prime into one `both`
/// record, failing when they disagree on the verdict or the period.
pub fn merge_checked(fast: &VerificationRecord, full: &VerificationRecord) -> Result<VerificationRecord> {
    if fast.p != full.p || fast.verdict != full.verdict || fast.period_len != full.period_len {
        return Err(Error::Internal(format!(
            "fast and full paths disagree for p = {}: fast {:?}, full {:?}",
            fast.p, fast, full
        )));
    }
    Ok(VerificationRecord {
        method: Method::Both,
        ..*fast
    })
}

/// Runs both paths and cross-checks them.
pub fn verify_both(mode: Mode, p: u64) -> Result<VerificationRecord> {
    merge_checked(&verify_fast(mode, p)?, &verify_full(mode, p)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub period_len: u64,
    pub central: u64,
    /// `l ≡ 2 (mod 4)` for `p ≡ 3 (mod 8)`, `l ≡ 0 (mod 4)` for
    /// `p ≡ 7 (mod 8)`, and the central-term law.
    pub golubeva_ok: bool,
}

pub fn classify(p: u64) -> Result<Classification> {
    require_prime_3_mod_4(p)?;
    let exp = CfExpansion::of(p)?;
    let l = exp.len() as u64;
    let congruence = match p % 8 {
        3 => l % 4 == 2,
        _ => l % 4 == 0,
    };
    Ok(Classification {
        period_len: l,
        central: exp.central().unwrap_or(0),
        golubeva_ok: congruence && central_term_law(p)?,
    })
}

/// Polynomial families of primes with a known short period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    /// `n^2 + 2`, `n >= 1`: period 2.
    Period2,
    /// `(n+1)^2 - 2`, `n >= 2`: period 4.
    Period4,
    /// `36k^2 + 52k + 19`, `k >= 0`: period 6.
    Period6,
}

impl Family {
    pub fn from_period(l: u64) -> Option<Self> {
        match l {
            2 => Some(Family::Period2),
            4 => Some(Family::Period4),
            6 => Some(Family::Period6),
            _ => None,
        }
    }

    pub fn period(self) -> u64 {
        match self {
            Family::Period2 => 2,
            Family::Period4 => 4,
            Family::Period6 => 6,
        }
    }

    fn value(self, t: u64) -> Option<u64> {
        match self {
            Family::Period2 => t.checked_add(1)?.checked_pow(2)?.checked_add(2),
            Family::Period4 => t.checked_add(3)?.checked_pow(2)?.checked_sub(2),
            Family::Period6 => 36u64
                .checked_mul(t.checked_mul(t)?)?
                .checked_add(52u64.checked_mul(t)?)?
                .checked_add(19),
        }
    }

    /// The first `count` primes of the family, ascending. Stops early only
    /// if the polynomial leaves `u64`.
    pub fn primes(self, count: usize) -> Vec<u64> {
        (0u64..)
            .map_while(|t| self.value(t))
            .filter(|&v| is_prime(v))
            .take(count)
            .collect()
    }
}

pub fn family_period2(count: usize) -> Vec<u64> {
    Family::Period2.primes(count)
}

pub fn family_period4(count: usize) -> Vec<u64> {
    Family::Period4.primes(count)
}

pub fn family_period6(count: usize) -> Vec<u64> {
    Family::Period6.primes(count)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cf_surd::detect_half_period;
    use crate::primes::primes_up_to;

    #[test]
    fn fast_examples() {
        let r = mordell_fast(3).unwrap();
        assert_eq!((r.period_len, r.witness_residue, r.verdict), (2, 1, Verdict::Holds));
        let r = mordell_fast(19).unwrap();
        assert_eq!((r.period_len, r.witness_residue, r.central), (6, 3, 3));
        let r = mordell_fast(10017223).unwrap();
        assert_eq!((r.period_len, r.witness_residue, r.central), (4, 1, 3163));
        assert_eq!(r.verdict, Verdict::Holds);
        assert_eq!(r.method, Method::Fast);
    }

    #[test]
    fn fast_rejects_bad_input() {
        assert_eq!(mordell_fast(13), Err(Error::NotCongruent3Mod4(13)));
        assert_eq!(mordell_fast(15), Err(Error::NotPrime(15)));
        assert_eq!(aac_fast(7), Err(Error::NotCongruent1Mod4(7)));
    }

    #[test]
    fn full_examples() {
        let r = mordell_full(7).unwrap();
        assert_eq!((r.witness_residue, r.verdict, r.method), (3, Verdict::Holds, Method::Full));
        let r = mordell_full(19).unwrap();
        assert_eq!(r.witness_residue, 1);
        let r = mordell_full(10017223).unwrap();
        assert_eq!((r.witness_residue, r.period_len), (3165, 4));
    }

    #[test]
    fn fast_walk_takes_half_a_period() {
        for p in primes_up_to(20_000).into_iter().filter(|p| p % 4 == 3) {
            let w = half_period_walk(p).unwrap();
            assert_eq!(w.steps * 2, w.period_len, "p = {p}");
            assert_eq!(w.period_len as usize, detect_half_period(p).unwrap().len);
        }
    }

    #[test]
    fn merge_detects_disagreement() {
        let fast = mordell_fast(7).unwrap();
        let full = mordell_full(7).unwrap();
        assert_eq!(merge_checked(&fast, &full).unwrap().method, Method::Both);
        let forged = VerificationRecord {
            verdict: Verdict::Counterexample,
            ..full
        };
        assert!(matches!(merge_checked(&fast, &forged), Err(Error::Internal(_))));
    }

    #[test]
    fn fast_and_full_agree() {
        for p in primes_up_to(5_000).into_iter().skip(1) {
            let mode = if p % 4 == 3 { Mode::Mordell } else { Mode::Aac };
            let r = verify_both(mode, p).unwrap();
            assert_eq!(r.verdict, Verdict::Holds, "p = {p}");
        }
    }

    #[test]
    fn classify_examples() {
        let c = classify(7).unwrap();
        assert_eq!((c.period_len, c.central, c.golubeva_ok), (4, 1, true));
        let c = classify(3).unwrap();
        assert_eq!((c.period_len, c.central, c.golubeva_ok), (2, 1, true));
        let c = classify(19).unwrap();
        assert_eq!((c.period_len, c.central, c.golubeva_ok), (6, 3, true));
        assert_eq!(classify(5), Err(Error::NotCongruent3Mod4(5)));
    }

    #[test]
    fn family_examples() {
        assert_eq!(family_period2(3), vec![3, 11, 83]);
        assert_eq!(family_period2(1), vec![3]);
        assert_eq!(family_period4(2), vec![7, 23]);
        assert_eq!(family_period6(2), vec![19, 107]);
        assert!(family_period4(2000).contains(&10017223));
        assert!(!family_period6(10).contains(&267));
    }

    #[test]
    fn family_periods() {
        for fam in [Family::Period2, Family::Period4, Family::Period6] {
            for p in fam.primes(50) {
                assert_eq!(CfExpansion::of(p).unwrap().len() as u64, fam.period(), "p = {p}");
            }
        }
    }
}
