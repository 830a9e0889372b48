//! Primality and prime enumeration.
//!
//! [`is_prime`] is a deterministic Miller–Rabin test for every `u64`.
//! [`sieve_segment`] enumerates the primes of a half-open range with a
//! segmented sieve of Eratosthenes over odd numbers.

use crate::error::{Error, Result};

/// Largest accepted segment length for [`sieve_segment`].
pub const MAX_SEGMENT: u64 = 1 << 32;

/// Largest accepted upper bound for [`sieve_segment`].
pub const MAX_SIEVE_BOUND: u64 = 1 << 62;

/// Witness set that makes Miller–Rabin deterministic below 2^64.
const MR_BASES: [u64; 7] = [2, 325, 9375, 28178, 450775, 9780504, 1795265022];

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &base in MR_BASES.iter() {
        let a = base % n;
        if a == 0 {
            continue;
        }
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Which primes a segment sieve should keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResidueFilter {
    /// p ≡ 3 (mod 4)
    ThreeMod4,
    /// p ≡ 1 (mod 4)
    OneMod4,
    All,
}

impl ResidueFilter {
    #[inline]
    pub fn accepts(self, p: u64) -> bool {
        match self {
            ResidueFilter::ThreeMod4 => p % 4 == 3,
            ResidueFilter::OneMod4 => p % 4 == 1,
            ResidueFilter::All => true,
        }
    }
}

/// Floor of the square root of a `u64`, exact for the whole range.
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).map_or(true, |sq| sq > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|sq| sq <= n) {
        r += 1;
    }
    r
}

/// Simple sieve returning every prime `<= limit`.
pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let limit = limit as usize;
    let mut composite = vec![false; limit + 1];
    let mut out = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        out.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    out
}

/// A segmented sieve with a cached table of base primes.
///
/// The base table covers `sqrt(bound)`, so one `Sieve` serves every
/// segment below `bound`.
#[derive(Debug, Clone)]
pub struct Sieve {
    bound: u64,
    base: Vec<u64>,
}

impl Sieve {
    pub fn new(bound: u64) -> Result<Self> {
        if bound > MAX_SIEVE_BOUND {
            return Err(Error::RangeTooLarge { lo: 0, hi: bound });
        }
        Ok(Sieve {
            bound,
            base: primes_up_to(isqrt(bound)),
        })
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    /// Primes in `[lo, hi)` accepted by `filter`, ascending.
    pub fn segment(&self, lo: u64, hi: u64, filter: ResidueFilter) -> Result<Vec<u64>> {
        if hi > self.bound {
            return Err(Error::RangeTooLarge { lo, hi });
        }
        if lo >= hi {
            return Ok(Vec::new());
        }
        if hi - lo > MAX_SEGMENT {
            return Err(Error::RangeTooLarge { lo, hi });
        }

        let mut out = Vec::new();
        if lo <= 2 && hi > 2 && filter.accepts(2) {
            out.push(2);
        }
        // Index k of the bitmap stands for the odd number first_odd + 2k.
        let first_odd = (lo.max(3)) | 1;
        if first_odd >= hi {
            return Ok(out);
        }
        let len = ((hi - first_odd + 1) / 2) as usize;
        let mut composite = vec![false; len];
        for &q in self.base.iter().skip(1) {
            let sq = q * q;
            if sq >= hi {
                break;
            }
            let mut start = if sq >= first_odd {
                sq
            } else {
                let r = first_odd % q;
                if r == 0 {
                    first_odd
                } else {
                    first_odd + (q - r)
                }
            };
            if start % 2 == 0 {
                start += q;
            }
            let mut k = ((start - first_odd) / 2) as usize;
            while k < len {
                composite[k] = true;
                k += q as usize;
            }
        }
        out.extend(
            composite
                .iter()
                .enumerate()
                .filter(|(_, &c)| !c)
                .map(|(k, _)| first_odd + 2 * k as u64)
                .filter(|&p| p > 1 && filter.accepts(p)),
        );
        Ok(out)
    }
}

/// Primes in `[lo, hi)` satisfying `filter`, ascending.
///
/// Fails with [`Error::RangeTooLarge`] when `hi` exceeds 2^62 or the segment is
/// longer than [`MAX_SEGMENT`].
pub fn sieve_segment(lo: u64, hi: u64, filter: ResidueFilter) -> Result<Vec<u64>> {
    if hi > MAX_SIEVE_BOUND || hi.saturating_sub(lo) > MAX_SEGMENT {
        return Err(Error::RangeTooLarge { lo, hi });
    }
    // Short windows far out are cheaper to test one by one than to build
    // the base table for.
    let root = isqrt(hi);
    if hi > lo && (hi - lo).saturating_mul(64) < root {
        return Ok((lo..hi).filter(|&n| filter.accepts(n) && is_prime(n)).collect());
    }
    Sieve::new(hi)?.segment(lo, hi, filter)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n % d == 0 {
                return false;
            }
            d += 1;
        }
        true
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        for n in 0..20_000 {
            assert_eq!(is_prime(n), trial_division(n), "n = {n}");
        }
    }

    #[test]
    fn miller_rabin_large_values() {
        assert!(is_prime(10017223));
        assert!(is_prime(18446744073709551557)); // largest prime below 2^64
        assert!(!is_prime(3215031751)); // strong pseudoprime to bases 2,3,5,7
        assert!(!is_prime(3825123056546413051));
        assert!(!is_prime(267));
    }

    #[test]
    fn isqrt_edges() {
        assert_eq!(isqrt(0), 0);
        assert_eq!(isqrt(1), 1);
        assert_eq!(isqrt(15), 3);
        assert_eq!(isqrt(16), 4);
        assert_eq!(isqrt(u64::MAX), 4294967295);
        assert_eq!(isqrt((1 << 62) - 1), (1 << 31) - 1);
    }

    #[test]
    fn segment_examples() {
        assert_eq!(
            sieve_segment(3, 30, ResidueFilter::ThreeMod4).unwrap(),
            vec![3, 7, 11, 19, 23]
        );
        assert_eq!(
            sieve_segment(3, 30, ResidueFilter::OneMod4).unwrap(),
            vec![5, 13, 17, 29]
        );
        assert_eq!(
            sieve_segment(10017220, 10017230, ResidueFilter::All).unwrap(),
            vec![10017223, 10017229]
        );
        assert_eq!(
            sieve_segment(0, 12, ResidueFilter::All).unwrap(),
            vec![2, 3, 5, 7, 11]
        );
        assert!(sieve_segment(5, 5, ResidueFilter::All).unwrap().is_empty());
    }

    #[test]
    fn segment_rejects_oversized_ranges() {
        assert!(matches!(
            sieve_segment(0, (1 << 62) + 1, ResidueFilter::All),
            Err(Error::RangeTooLarge { .. })
        ));
        assert!(matches!(
            sieve_segment(0, 1 << 33, ResidueFilter::All),
            Err(Error::RangeTooLarge { .. })
        ));
    }

    #[test]
    fn stitched_segments_equal_single_shot_to_ten_million() {
        let limit = 10_000_000;
        let sieve = Sieve::new(limit).unwrap();
        let whole = sieve.segment(0, limit, ResidueFilter::All).unwrap();
        let mut stitched = Vec::new();
        let step = 777_777;
        let mut lo = 0;
        while lo < limit {
            let hi = (lo + step).min(limit);
            stitched.extend(sieve.segment(lo, hi, ResidueFilter::All).unwrap());
            lo = hi;
        }
        assert_eq!(whole.len(), 664_579);
        assert_eq!(whole, stitched);
    }

    proptest! {
        #[test]
        fn segment_agrees_with_primality_test(lo in 0u64..2_000_000, len in 1u64..5_000) {
            let got = sieve_segment(lo, lo + len, ResidueFilter::All).unwrap();
            let want: Vec<u64> = (lo..lo + len).filter(|&n| is_prime(n)).collect();
            prop_assert_eq!(got, want);
        }

        #[test]
        fn stitching_is_seamless(lo in 0u64..1_000_000, a in 1u64..3_000, b in 1u64..3_000) {
            let sieve = Sieve::new(lo + a + b).unwrap();
            let mut left = sieve.segment(lo, lo + a, ResidueFilter::ThreeMod4).unwrap();
            left.extend(sieve.segment(lo + a, lo + a + b, ResidueFilter::ThreeMod4).unwrap());
            prop_assert_eq!(left, sieve.segment(lo, lo + a + b, ResidueFilter::ThreeMod4).unwrap());
        }
    }
}
