//! Prime enumeration and the arithmetic functions built on it: π with and
//! without congruence conditions, Λ, ψ, Euler's totient, primorials, and
//! detection of strings of consecutive primes satisfying a predicate.
//!
//! All range scans run on the segmented wheel sieve. Parallel runs use a
//! fixed segment grid and merge partial results in ascending order, so every
//! aggregate — including the compensated ψ sums — is bit-identical to the
//! sequential result.

mod sieve;

pub use sieve::DEFAULT_CEILING;

use crate::accum::KahanSum;
use crate::{par, Error, Result};
use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};
use sieve::{base_primes, check_range, isqrt_u64, sieve_segment, simple_sieve, SEGMENT_SPAN};

/// Exact list of the primes in a half-open range.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeRange {
    pub lo: u64,
    pub hi: u64,
    pub primes: Vec<u64>,
}

/// Applies `f` to each sieve segment `(a, b, primes)` of `[lo, hi)` and
/// returns the per-segment results in ascending range order.
fn map_segments<U, F>(lo: u64, hi: u64, f: F) -> Result<Vec<U>>
where
    U: Send,
    F: Fn(u64, u64, &[u64]) -> U + Sync + Send,
{
    check_range(lo, hi)?;
    let base = base_primes(hi);
    let chunks = par::chunk_ranges(lo, hi, SEGMENT_SPAN);
    Ok(par::map_ordered(&chunks, |&(a, b)| f(a, b, &sieve_segment(&base, a, b))))
}

/// Streams every prime of `[lo, hi)` in ascending order through `f`.
pub fn for_each_prime<F: FnMut(u64)>(lo: u64, hi: u64, mut f: F) -> Result<()> {
    check_range(lo, hi)?;
    let base = base_primes(hi);
    for (a, b) in par::chunk_ranges(lo, hi, SEGMENT_SPAN) {
        for p in sieve_segment(&base, a, b) {
            f(p);
        }
    }
    Ok(())
}

/// All primes in `[lo, hi)`.
pub fn primes_in(lo: u64, hi: u64) -> Result<PrimeRange> {
    let parts = map_segments(lo, hi, |_, _, ps| ps.to_vec())?;
    let mut primes = Vec::with_capacity(parts.iter().map(Vec::len).sum());
    for part in parts {
        primes.extend(part);
    }
    Ok(PrimeRange { lo, hi, primes })
}

/// π(N): number of primes ≤ N.
pub fn pi(n: u64) -> Result<u64> {
    if n < 2 {
        return Ok(0);
    }
    Ok(map_segments(2, n + 1, |_, _, ps| ps.len() as u64)?.into_iter().sum())
}

/// π(N; a, q): primes p ≤ N with p ≡ a (mod q).
pub fn pi_ap(n: u64, a: u64, q: u64) -> Result<u64> {
    if q == 0 || a >= q {
        return Err(Error::Invalid(format!("need 0 ≤ a < q, got a = {a}, q = {q}")));
    }
    if n < 2 {
        return Ok(0);
    }
    let counts = map_segments(2, n + 1, |_, _, ps| {
        ps.iter().filter(|&&p| p % q == a).count() as u64
    })?;
    Ok(counts.into_iter().sum())
}

/// π(N, M; a, q): primes in (N, M] congruent to a mod q.
pub fn pi_ap_range(n: u64, m: u64, a: u64, q: u64) -> Result<u64> {
    if m <= n {
        return Ok(0);
    }
    Ok(pi_ap(m, a, q)? - pi_ap(n, a, q)?)
}

/// Deterministic Miller–Rabin for u64 (full coverage with fixed bases).
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n.is_multiple_of(p) {
            return false;
        }
    }
    let d = n - 1;
    let s = d.trailing_zeros();
    let d = d >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
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

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64;
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

/// Λ(n): log p if n = p^k, else 0.
pub fn mangoldt(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let kmax = 63 - n.leading_zeros() as u64; // ⌊log2 n⌋
    for k in (2..=kmax.max(1)).rev() {
        let r = num_integer::Roots::nth_root(&n, k as u32);
        if checked_pow_u64(r, k) == Some(n) {
            return if is_prime(r) { (r as f64).ln() } else { 0.0 };
        }
    }
    if is_prime(n) {
        (n as f64).ln()
    } else {
        0.0
    }
}

fn checked_pow_u64(base: u64, exp: u64) -> Option<u64> {
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = acc.checked_mul(base)?;
    }
    Some(acc)
}

/// Positions n ≤ N with Λ(n) ≠ 0 from squares upward: (n, log p), sorted.
pub fn higher_power_entries(n: u64) -> Vec<(u64, f64)> {
    let mut out = Vec::new();
    for p in simple_sieve(isqrt_u64(n)) {
        let lp = (p as f64).ln();
        let mut m = p * p;
        loop {
            out.push((m, lp));
            match m.checked_mul(p) {
                Some(next) if next <= n => m = next,
                _ => break,
            }
        }
    }
    out.sort_unstable_by_key(|&(m, _)| m);
    out
}

/// ψ(N) = Σ_{n≤N} Λ(n), accumulated in ascending n with compensation.
pub fn psi(n: u64) -> Result<f64> {
    psi_filtered(n, None)
}

/// ψ(N; a, q) = Σ_{n≤N, n≡a (q)} Λ(n).
pub fn psi_ap(n: u64, a: u64, q: u64) -> Result<f64> {
    if q == 0 || a >= q {
        return Err(Error::Invalid(format!("need 0 ≤ a < q, got a = {a}, q = {q}")));
    }
    psi_filtered(n, Some((a, q)))
}

fn psi_filtered(n: u64, ap: Option<(u64, u64)>) -> Result<f64> {
    if n < 2 {
        return Ok(0.0);
    }
    let keep = |m: u64| match ap {
        Some((a, q)) => m % q == a,
        None => true,
    };
    let powers = higher_power_entries(n);
    // Per-segment compensated partials over the merged (prime ∪ prime-power)
    // stream, folded in ascending segment order.
    let partials = map_segments(2, n + 1, |a, b, ps| {
        let start = powers.partition_point(|&(m, _)| m < a);
        let end = powers.partition_point(|&(m, _)| m < b);
        let mut pw = powers[start..end].iter().peekable();
        let mut acc = KahanSum::new();
        for &p in ps {
            while let Some(&&(m, lp)) = pw.peek() {
                if m < p {
                    if keep(m) {
                        acc.add(lp);
                    }
                    pw.next();
                } else {
                    break;
                }
            }
            if keep(p) {
                acc.add((p as f64).ln());
            }
        }
        for &(m, lp) in pw {
            if keep(m) {
                acc.add(lp);
            }
        }
        acc
    })?;
    let mut total = KahanSum::new();
    for part in partials {
        total.merge(part);
    }
    Ok(total.value())
}

/// Euler's totient, exact via trial-division factorization.
pub fn euler_phi(q: u64) -> u64 {
    assert!(q >= 1, "euler_phi requires q ≥ 1");
    let mut n = q;
    let mut phi = q;
    let mut f = 2u64;
    while f * f <= n {
        if n.is_multiple_of(f) {
            phi -= phi / f;
            while n.is_multiple_of(f) {
                n /= f;
            }
        }
        f += if f == 2 { 1 } else { 2 };
    }
    if n > 1 {
        phi -= phi / n;
    }
    phi
}

/// Product of all primes ≤ d (empty product = 1).
pub fn primorial(d: u64) -> BigUint {
    simple_sieve(d).into_iter().map(BigUint::from).fold(BigUint::one(), |acc, p| acc * p)
}

/// A window of `m` consecutive primes all satisfying a predicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeString {
    /// 0-based index of the first window prime within the primes of the
    /// scanned range (indices count all primes, satisfying or not).
    pub start_index: u64,
    pub primes: Vec<u64>,
    /// Last window prime minus first.
    pub diameter: u64,
}

/// Finds every length-`m` window of consecutive primes in `[lo, hi)` whose
/// members all satisfy `pred`. Consecutiveness is in the full ordering of the
/// primes, so one failing prime breaks a run.
pub fn consecutive_prime_strings<F>(
    lo: u64,
    hi: u64,
    mut pred: F,
    m: usize,
) -> Result<Vec<PrimeString>>
where
    F: FnMut(u64) -> bool,
{
    if m == 0 {
        return Err(Error::Invalid("window length m must be ≥ 1".into()));
    }
    let mut out = Vec::new();
    let mut run: Vec<u64> = Vec::new();
    let mut run_start = 0u64;
    let mut index = 0u64;
    let flush = |run: &mut Vec<u64>, run_start: u64, out: &mut Vec<PrimeString>| {
        if run.len() >= m {
            for o in 0..=(run.len() - m) {
                let window = &run[o..o + m];
                out.push(PrimeString {
                    start_index: run_start + o as u64,
                    primes: window.to_vec(),
                    diameter: window[m - 1] - window[0],
                });
            }
        }
        run.clear();
    };
    for_each_prime(lo, hi, |p| {
        if pred(p) {
            if run.is_empty() {
                run_start = index;
            }
            run.push(p);
        } else {
            flush(&mut run, run_start, &mut out);
        }
        index += 1;
    })?;
    flush(&mut run, run_start, &mut out);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Trial-division oracle, deliberately naive.
    fn trial_primes(lo: u64, hi: u64) -> Vec<u64> {
        (lo.max(2)..hi).filter(|&n| (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)).collect()
    }

    #[test]
    fn primes_in_first_decade_and_century() {
        assert_eq!(primes_in(2, 10).unwrap().primes, vec![2, 3, 5, 7]);
        assert_eq!(primes_in(2, 101).unwrap().primes.len(), 25);
        assert_eq!(primes_in(2, 101).unwrap().primes, trial_primes(2, 101));
    }

    #[test]
    fn segmented_sieve_agrees_with_trial_division_below_1e5() {
        // Full range plus awkward unaligned subranges.
        assert_eq!(primes_in(2, 100_000).unwrap().primes, trial_primes(2, 100_000));
        for (lo, hi) in [(2u64, 3u64), (89, 97), (1000, 1063), (99_000, 100_000), (65_521, 65_610)] {
            assert_eq!(primes_in(lo, hi).unwrap().primes, trial_primes(lo, hi), "[{lo},{hi})");
        }
    }

    #[test]
    fn million_prime_count_against_independent_sieve() {
        // Independent oracle: bool-array sieve written differently from both
        // the wheel sieve and simple_sieve.
        let n = 1_000_000usize;
        let mut is_comp = vec![false; n + 1];
        let mut count = 0u64;
        for i in 2..=n {
            if !is_comp[i] {
                count += 1;
                let mut j = i * i;
                while j <= n {
                    is_comp[j] = true;
                    j += i;
                }
            }
        }
        assert_eq!(count, 78_498);
        assert_eq!(primes_in(2, n as u64 + 1).unwrap().primes.len() as u64, count);
    }

    #[test]
    fn range_validation() {
        assert!(primes_in(1, 10).is_err());
        assert!(primes_in(10, 10).is_err());
        assert!(primes_in(2, (1 << 40) + 1).is_err());
    }

    #[test]
    fn pi_ap_examples_and_partition() {
        assert_eq!(pi_ap(20, 3, 4).unwrap(), 4); // 3, 7, 11, 19
        assert_eq!(pi_ap(20, 0, 1).unwrap(), 8);
        assert_eq!(pi_ap(20, 0, 2).unwrap(), 1); // only p = 2
        for q in [1u64, 2, 3, 5, 7, 30] {
            for n in [20u64, 1000, 4999] {
                let total: u64 = (0..q).map(|a| pi_ap(n, a, q).unwrap()).sum();
                assert_eq!(total, pi(n).unwrap(), "partition failed for N={n}, q={q}");
            }
        }
        assert!(pi_ap(20, 4, 4).is_err());
    }

    #[test]
    fn pi_ap_range_counts_half_open_on_the_left() {
        // (N, M]: primes in (10, 20] ≡ 1 mod 2: 11, 13, 17, 19.
        assert_eq!(pi_ap_range(10, 20, 1, 2).unwrap(), 4);
        // Boundary prime at N excluded, at M included.
        assert_eq!(pi_ap_range(11, 13, 1, 2).unwrap(), 1);
        assert_eq!(pi_ap_range(20, 10, 1, 2).unwrap(), 0);
    }

    #[test]
    fn miller_rabin_matches_trial_division() {
        let small: Vec<u64> = trial_primes(2, 10_000);
        for n in 0..10_000u64 {
            assert_eq!(is_prime(n), small.binary_search(&n).is_ok(), "n = {n}");
        }
        // A few larger spot checks.
        assert!(is_prime(1_000_000_007));
        assert!(is_prime((1 << 31) - 1)); // Mersenne prime 2^31 − 1
        assert!(!is_prime(3_215_031_751)); // strong pseudoprime to bases 2,3,5,7
        assert!(!is_prime(341)); // 11·31
    }

    #[test]
    fn mangoldt_prime_powers_only() {
        assert_eq!(mangoldt(8), 2f64.ln());
        assert_eq!(mangoldt(6), 0.0);
        assert_eq!(mangoldt(1), 0.0);
        assert_eq!(mangoldt(121), 11f64.ln());
        assert_eq!(mangoldt(1296), 0.0); // 6^4
        assert_eq!(mangoldt(1 << 40), 2f64.ln());
        assert_eq!(mangoldt(97), 97f64.ln());
    }

    #[test]
    fn psi_small_values_match_direct_sums() {
        assert_eq!(psi(1).unwrap(), 0.0);
        let v = psi(10).unwrap();
        assert!((v - 2520f64.ln()).abs() < 1e-12);
        let w = psi_ap(10, 0, 2).unwrap();
        assert!((w - 3.0 * 2f64.ln()).abs() < 1e-12);
        // Direct-summation oracle via mangoldt.
        for n in [50u64, 500, 5000] {
            let direct: f64 = (1..=n).map(mangoldt).sum();
            assert!((psi(n).unwrap() - direct).abs() < 1e-9, "psi({n})");
        }
    }

    #[test]
    fn psi_minus_theta_within_sqrt_log_squared_envelope() {
        // ψ(N) − Σ_{p≤N} log p is the higher-power contribution; it is
        // positive and ≤ √N·(log N)² with constant 1 at these scales.
        for n in [100u64, 10_000, 250_000] {
            let psi_v = psi(n).unwrap();
            let mut theta = KahanSum::new();
            for_each_prime(2, n + 1, |p| theta.add((p as f64).ln())).unwrap();
            let diff = psi_v - theta.value();
            let cap = (n as f64).sqrt() * (n as f64).ln().powi(2);
            assert!(diff > 0.0 && diff <= cap, "n = {n}: diff = {diff}, cap = {cap}");
        }
    }

    #[test]
    fn totient_examples_and_coprime_count_oracle() {
        assert_eq!(euler_phi(1), 1);
        assert_eq!(euler_phi(13), 12);
        assert_eq!(euler_phi(12), 4);
        fn gcd(a: u64, b: u64) -> u64 {
            if b == 0 {
                a
            } else {
                gcd(b, a % b)
            }
        }
        for q in 1..=200u64 {
            let direct = (1..=q).filter(|&k| gcd(k, q) == 1).count() as u64;
            assert_eq!(euler_phi(q), direct, "q = {q}");
        }
    }

    #[test]
    fn primorials() {
        assert_eq!(primorial(1), BigUint::one());
        assert_eq!(primorial(2), BigUint::from(2u32));
        assert_eq!(primorial(10), BigUint::from(210u32));
        assert_eq!(primorial(30), BigUint::from(6_469_693_230u64));
    }

    #[test]
    fn prime_strings_all_adjacent_pairs() {
        let strings = consecutive_prime_strings(2, 12, |_| true, 2).unwrap();
        let pairs: Vec<(u64, u64)> = strings.iter().map(|s| (s.primes[0], s.primes[1])).collect();
        assert_eq!(pairs, vec![(2, 3), (3, 5), (5, 7), (7, 11)]);
        assert_eq!(strings[0].start_index, 0);
        assert_eq!(strings[3].start_index, 3);
        assert_eq!(strings[3].diameter, 4);
    }

    #[test]
    fn prime_strings_empty_predicate_and_m1_identity() {
        assert!(consecutive_prime_strings(2, 100, |_| false, 2).unwrap().is_empty());
        let singles = consecutive_prime_strings(2, 100, |_| true, 1).unwrap();
        let listed: Vec<u64> = singles.iter().map(|s| s.primes[0]).collect();
        assert_eq!(listed, primes_in(2, 100).unwrap().primes);
        assert!(singles.iter().all(|s| s.diameter == 0));
    }

    #[test]
    fn prime_strings_runs_break_on_failures() {
        // Predicate true only on {3, 5, 7, 13}: runs [3,5,7] and [13].
        let keep = [3u64, 5, 7, 13];
        let strings = consecutive_prime_strings(2, 20, |p| keep.contains(&p), 2).unwrap();
        let pairs: Vec<(u64, u64)> = strings.iter().map(|s| (s.primes[0], s.primes[1])).collect();
        assert_eq!(pairs, vec![(3, 5), (5, 7)]);
        assert_eq!(strings[0].start_index, 1);
    }

    #[test]
    fn prime_strings_sqrt_predicate_matches_per_prime_oracle() {
        // {√p} < 0.5 via f64 is unambiguous for p < 100 (no value near 0.5).
        let pred = |p: u64| (p as f64).sqrt().fract() < 0.5;
        let strings = consecutive_prime_strings(2, 100, pred, 2).unwrap();
        let primes = primes_in(2, 100).unwrap().primes;
        let mut expect = Vec::new();
        for w in primes.windows(2) {
            if pred(w[0]) && pred(w[1]) {
                expect.push((w[0], w[1]));
            }
        }
        let got: Vec<(u64, u64)> = strings.iter().map(|s| (s.primes[0], s.primes[1])).collect();
        assert_eq!(got, expect);
    }
}
