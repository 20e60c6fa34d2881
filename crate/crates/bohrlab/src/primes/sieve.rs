//! Segmented sieve of Eratosthenes on a mod-30 wheel.
//!
//! Numbers coprime to 30 occupy 8 residue classes, so a block of 30 integers
//! packs into one byte. Segments default to 2^22 integers: large scans run in
//! L2-sized memory regardless of the range end, and segment boundaries form a
//! fixed grid so parallel and sequential runs aggregate identically.

use crate::{Error, Result};

/// Residues coprime to 30, in ascending order; bit `i` of a wheel byte.
const WHEEL: [u64; 8] = [1, 7, 11, 13, 17, 19, 23, 29];

/// Map residue mod 30 → wheel bit index, or 0xFF for spoked-out residues.
const WHEEL_IDX: [u8; 30] = {
    let mut t = [0xFFu8; 30];
    let mut i = 0;
    while i < 8 {
        t[WHEEL[i] as usize] = i as u8;
        i += 1;
    }
    t
};

/// Largest supported range end: segment grids and u64 arithmetic stay exact.
pub const DEFAULT_CEILING: u64 = 1 << 40;

/// Integers per segment.
pub(crate) const SEGMENT_SPAN: u64 = 1 << 22;

/// Plain odd-only sieve for base primes and small ranges; `limit` inclusive.
pub(crate) fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut primes = vec![2u64];
    let mut i = 3usize;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += 2 * i;
            }
        }
        i += 2;
    }
    let mut k = 3usize;
    while k <= n {
        if !composite[k] {
            primes.push(k as u64);
        }
        k += 2;
    }
    primes
}

pub(crate) fn isqrt_u64(n: u64) -> u64 {
    num_integer::Roots::sqrt(&n)
}

/// Sieves the primes of `[a, b)` given base primes covering `sqrt(b − 1)`.
/// `base` must contain every prime `p` with `7 ≤ p ≤ sqrt(b − 1)`.
pub(crate) fn sieve_segment(base: &[u64], a: u64, b: u64) -> Vec<u64> {
    debug_assert!(a < b);
    let lo_byte = a / 30;
    let hi_byte = (b - 1) / 30;
    let nbytes = (hi_byte - lo_byte + 1) as usize;
    let mut bits = vec![0xFFu8; nbytes];
    let seg_base = lo_byte * 30;
    for &p in base {
        if p < 7 {
            continue;
        }
        if p.saturating_mul(p) >= b {
            break;
        }
        // Smallest wheel-coprime cofactor w with p·w ≥ max(a, p²).
        let start = a.max(p * p);
        let mut w = start.div_ceil(p);
        // Advance w to the next residue coprime to 30.
        let (mut block, mut idx) = {
            let r = w % 30;
            let mut i = 0;
            while i < 8 && WHEEL[i] < r {
                i += 1;
            }
            if i == 8 {
                (w / 30 + 1, 0)
            } else {
                (w / 30, i)
            }
        };
        loop {
            w = block * 30 + WHEEL[idx];
            let m = p * w;
            if m >= b {
                break;
            }
            let byte = (m / 30 - lo_byte) as usize;
            let bit = WHEEL_IDX[(m % 30) as usize];
            bits[byte] &= !(1u8 << bit);
            idx += 1;
            if idx == 8 {
                idx = 0;
                block += 1;
            }
        }
    }
    let mut out = Vec::new();
    for &p in &[2u64, 3, 5] {
        if p >= a && p < b {
            out.push(p);
        }
    }
    for (j, &byte) in bits.iter().enumerate() {
        if byte == 0 {
            continue;
        }
        let block_base = seg_base + 30 * j as u64;
        let mut rem = byte;
        while rem != 0 {
            let i = rem.trailing_zeros() as usize;
            rem &= rem - 1;
            let n = block_base + WHEEL[i];
            if n >= a && n < b && n != 1 {
                out.push(n);
            }
        }
    }
    out
}

pub(crate) fn check_range(lo: u64, hi: u64) -> Result<()> {
    if lo < 2 || lo >= hi {
        return Err(Error::Invalid(format!("need 2 ≤ lo < hi, got [{lo}, {hi})")));
    }
    if hi > DEFAULT_CEILING {
        return Err(Error::RangeTooLarge(format!("hi = {hi} exceeds 2^40")));
    }
    Ok(())
}

/// Base primes sufficient to sieve any segment of `[.., hi)`.
pub(crate) fn base_primes(hi: u64) -> Vec<u64> {
    simple_sieve(isqrt_u64(hi - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial_primes(lo: u64, hi: u64) -> Vec<u64> {
        (lo..hi)
            .filter(|&n| n >= 2 && (2..=isqrt_u64(n)).all(|d| n % d != 0))
            .collect()
    }

    #[test]
    fn wheel_byte_emission_is_ascending_and_exact() {
        let base = base_primes(100_000);
        for (lo, hi) in [(2u64, 100), (2, 30), (29, 31), (7919, 7921), (90_000, 100_000), (2, 100_000)] {
            let got = sieve_segment(&base, lo, hi);
            assert_eq!(got, trial_primes(lo, hi), "range [{lo}, {hi})");
            assert!(got.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn segment_straddling_byte_boundaries() {
        let base = base_primes(10_000);
        // Boundaries not aligned to 30 exercise the trim paths.
        for lo in 95..125u64 {
            let got = sieve_segment(&base, lo, lo + 37);
            assert_eq!(got, trial_primes(lo, lo + 37), "lo = {lo}");
        }
    }

    #[test]
    fn simple_sieve_counts() {
        assert_eq!(simple_sieve(1).len(), 0);
        assert_eq!(simple_sieve(2), vec![2]);
        assert_eq!(simple_sieve(100).len(), 25);
        assert_eq!(simple_sieve(104_729).len(), 10_000); // p_10000 = 104729
    }
}
