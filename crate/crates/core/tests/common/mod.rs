//! Oracles that share no code path with the library.

#![allow(dead_code)]

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive, Zero};

pub fn isqrt_u128(n: u128) -> u128 {
    let mut r = (n as f64).sqrt() as u128;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

pub fn is_square_u64(n: u64) -> bool {
    let r = isqrt_u128(n as u128);
    r * r == n as u128
}

/// Smallest `y <= max_y` such that `d y^2 ± 1` is a square, as
/// `(x, y, norm)`. Norm `-1` wins a tie at the same `y`.
pub fn scan_pell(d: u64, max_y: u64) -> Option<(u128, u128, i32)> {
    for y in 1..=max_y as u128 {
        let t = d as u128 * y * y;
        for (v, norm) in [(t - 1, -1), (t + 1, 1)] {
            let r = isqrt_u128(v);
            if r * r == v {
                return Some((r, y, norm));
            }
        }
    }
    None
}

/// Minimal solution of `x^2 - d y^2 = 1` by the cyclic (chakravala)
/// method.
pub fn chakravala(d: u64) -> (BigUint, BigUint) {
    let dd = BigInt::from(d);
    let root = isqrt_u128(d as u128) as i64;
    let pick = |m: i64| (BigInt::from(m) * m - &dd).abs();
    let start = if pick(root + 1) < pick(root) { root + 1 } else { root };
    let mut a = BigInt::from(start);
    let mut b = BigInt::from(1);
    let mut k = &a * &a - &dd;
    while k != BigInt::from(1) {
        let kk = k.abs().to_i64().unwrap();
        // m ≡ r (mod |k|) makes a + b m divisible by |k|
        let r = (0..kk)
            .find(|&r| ((&a + &b * r) % kk).is_zero())
            .expect("a solvable congruence");
        let t0 = (root - r).div_euclid(kk);
        let m = (t0 - 1..=t0 + 2)
            .map(|t| r + t * kk)
            .filter(|&m| m > 0)
            .min_by_key(|&m| (m as i128 * m as i128 - d as i128).abs())
            .unwrap();
        let mm = BigInt::from(m);
        let na = (&a * &mm + &dd * &b) / kk;
        let nb = (&a + &b * &mm) / kk;
        let nk = (&mm * &mm - &dd) / &k;
        a = na.abs();
        b = nb.abs();
        k = nk;
    }
    (a.to_biguint().unwrap(), b.to_biguint().unwrap())
}

/// Trial-division primality, for small inputs.
pub fn is_prime_slow(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut f = 2;
    while f * f <= n {
        if n % f == 0 {
            return false;
        }
        f += 1;
    }
    true
}
