//! Exponential sums `Σ e(⟨m, F̄(n)⟩ + P(n))` over filtered dyadic ranges.
//!
//! Phases are certified in integer ball arithmetic, reduced mod 1 before
//! exponentiation, and accumulated in ascending n with compensated
//! summation. Radii propagate through `e(·)` via the Lipschitz bound
//! `|e(x) − e(y)| ≤ 2π|x − y|`, plus a small slack for the final
//! double-precision trigonometry, so the returned ball always contains the
//! true sum.

use super::ComplexBall;
use crate::accum::KahanSum;
use crate::realexp::RealExpPoly;
use crate::rigor::{eval_enclosure, PowTerm};
use crate::{par, primes, Error, Precision, Rat, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

/// Worst-case error of the `f64` midpoint conversion plus `cos`/`sin`
/// evaluation, per term. Generous relative to the ~1 ulp reality.
const TRIG_SLACK: f64 = 1e-14;

/// Which integers of a dyadic range enter a sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FilterKind {
    /// Every integer.
    All,
    /// Integers ≡ c (mod q).
    Ap { c: u64, q: u64 },
    /// Primes.
    Primes,
    /// Primes ≡ a (mod q).
    PrimesAp { a: u64, q: u64 },
}

/// A [`FilterKind`] plus an optional subinterval clamp `[u, v)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RangeFilter {
    kind: FilterKind,
    clamp: Option<(u64, u64)>,
}

impl RangeFilter {
    pub fn new(kind: FilterKind) -> Result<Self> {
        match kind {
            FilterKind::Ap { c, q } | FilterKind::PrimesAp { a: c, q } => {
                if q == 0 || c >= q {
                    return Err(Error::Invalid(format!(
                        "progression needs 0 ≤ residue < modulus, got {c} mod {q}"
                    )));
                }
            }
            FilterKind::All | FilterKind::Primes => {}
        }
        Ok(RangeFilter { kind, clamp: None })
    }

    pub fn all() -> Self {
        RangeFilter { kind: FilterKind::All, clamp: None }
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn clamp(&self) -> Option<(u64, u64)> {
        self.clamp
    }

    /// Restricts to `[u, v)`; the only composition the filter supports.
    pub fn clamped(mut self, u: u64, v: u64) -> Result<Self> {
        if u >= v {
            return Err(Error::Invalid(format!("empty clamp [{u}, {v})")));
        }
        self.clamp = Some((u, v));
        Ok(self)
    }

    /// Parses `all`, `ap:c,q`, `primes`, or `primes-ap:a,q`.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("unrecognized filter `{text}`"));
        let pair = |rest: &str| -> Result<(u64, u64)> {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
        };
        match text.trim() {
            "all" => Ok(RangeFilter::all()),
            "primes" => RangeFilter::new(FilterKind::Primes),
            t => {
                if let Some(rest) = t.strip_prefix("primes-ap:") {
                    let (a, q) = pair(rest)?;
                    RangeFilter::new(FilterKind::PrimesAp { a, q })
                } else if let Some(rest) = t.strip_prefix("ap:") {
                    let (c, q) = pair(rest)?;
                    RangeFilter::new(FilterKind::Ap { c, q })
                } else {
                    Err(bad())
                }
            }
        }
    }

    /// Calls `visit` on every member of the filter within `[lo, hi)`,
    /// ascending. `[lo, hi)` is already intersected with the clamp.
    pub(crate) fn for_each_in(&self, lo: u64, hi: u64, mut visit: impl FnMut(u64)) -> Result<()> {
        if lo >= hi {
            return Ok(());
        }
        match self.kind {
            FilterKind::All => (lo..hi).for_each(visit),
            FilterKind::Ap { c, q } => {
                let mut n = lo + (c + q - lo % q) % q;
                while n < hi {
                    visit(n);
                    n += q;
                }
            }
            FilterKind::Primes => {
                let lo = lo.max(2);
                if lo < hi {
                    primes::for_each_prime(lo, hi, visit)?;
                }
            }
            FilterKind::PrimesAp { a, q } => {
                let lo = lo.max(2);
                if lo < hi {
                    primes::for_each_prime(lo, hi, |p| {
                        if p % q == a {
                            visit(p);
                        }
                    })?;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn intersect(&self, lo: u64, hi: u64) -> (u64, u64) {
        match self.clamp {
            Some((u, v)) => (lo.max(u), hi.min(v)),
            None => (lo, hi),
        }
    }
}

/// Number of filtered integers in `[n_lo, 2·n_lo)`.
pub fn filtered_count(filter: &RangeFilter, n_lo: u64) -> Result<u64> {
    if n_lo < 1 {
        return Err(Error::Invalid("range start must be ≥ 1".into()));
    }
    let (lo, hi) = filter.intersect(n_lo, 2 * n_lo);
    let mut count = 0u64;
    filter.for_each_in(lo, hi, |_| count += 1)?;
    Ok(count)
}

fn phase_terms(
    poly: &RealExpPoly,
    shifts: &[BigUint],
    m: &[i64],
    p_coeffs: &[Rat],
    n: u64,
) -> Vec<PowTerm> {
    let n_big = BigUint::from(n);
    let mut terms = Vec::new();
    for (h, &mj) in shifts.iter().zip(m) {
        if mj == 0 {
            continue;
        }
        terms.extend(poly.terms_at(&(&n_big + h), &Rat::from_integer(BigInt::from(mj))));
    }
    for (k, c) in p_coeffs.iter().enumerate() {
        if !c.is_zero() {
            terms.push(PowTerm::new(c, n_big.clone(), &Rat::from_integer(BigInt::from(k))));
        }
    }
    terms
}

/// Rigorous enclosure of `Σ e(⟨m, F̄(n)⟩ + P(n))` over the filtered subset
/// of `[n_lo, 2·n_lo)`, where `F̄(n) = (F(n+h₁), …, F(n+h_ℓ))` and
/// `P(n) = Σ_k p_coeffs[k]·nᵏ`.
///
/// Requires `m ≠ 0` or `P` nonconstant — otherwise the "sum" is just the
/// filtered count, available from [`filtered_count`]. `target_radius`
/// bounds each term's phase radius; the ball radius grows linearly with the
/// number of terms.
#[allow(clippy::too_many_arguments)]
pub fn exp_sum(
    poly: &RealExpPoly,
    shifts: &[BigUint],
    m: &[i64],
    p_coeffs: &[Rat],
    filter: &RangeFilter,
    n_lo: u64,
    target_radius: f64,
    prec: Precision,
) -> Result<ComplexBall> {
    if shifts.is_empty() || shifts.len() != m.len() {
        return Err(Error::Invalid(format!(
            "need matching nonempty shifts and frequencies, got {} and {}",
            shifts.len(),
            m.len()
        )));
    }
    let poly_degree_zero = p_coeffs.iter().skip(1).all(Zero::is_zero);
    if m.iter().all(|&v| v == 0) && poly_degree_zero {
        return Err(Error::Invalid(
            "zero frequency with constant phase polynomial: the sum is the filtered count".into(),
        ));
    }
    if n_lo < 1 {
        return Err(Error::Invalid("range start must be ≥ 1".into()));
    }
    if !(target_radius > 0.0) {
        return Err(Error::Invalid("target_radius must be positive".into()));
    }
    let target_bits = (-target_radius.log2()).ceil().max(1.0) as u32;
    let (lo, hi) = filter.intersect(n_lo, 2 * n_lo);
    if lo >= hi {
        return Ok(ComplexBall::zero());
    }
    let chunks = par::chunk_ranges(lo, hi, 1 << 12);
    let parts: Vec<Result<(KahanSum, KahanSum, f64)>> = par::map_ordered(&chunks, |&(a, b)| {
        let mut re = KahanSum::default();
        let mut im = KahanSum::default();
        let mut rad = 0.0f64;
        let mut err = None;
        filter.for_each_in(a, b, |n| {
            if err.is_some() {
                return;
            }
            let terms = phase_terms(poly, shifts, m, p_coeffs, n);
            match eval_enclosure(&terms, prec, target_bits, true) {
                Ok(r) => {
                    let ang = TAU * r.mid_f64();
                    re.add(ang.cos());
                    im.add(ang.sin());
                    rad += TAU * r.rad_f64() + TRIG_SLACK;
                }
                Err(e) => err = Some(e),
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok((re, im, rad)),
        }
    });
    let mut re = KahanSum::default();
    let mut im = KahanSum::default();
    let mut rad = 0.0f64;
    for part in parts {
        let (pr, pi, pd) = part?;
        re.merge(pr);
        im.merge(pi);
        rad += pd;
    }
    Ok(ComplexBall { re: re.value(), im: im.value(), rad })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn sqrt_frac_oracle(n: u64, bits: u32) -> f64 {
        let scaled = (BigUint::from(n) << (2 * bits as usize)).sqrt();
        let whole = BigUint::from(n).sqrt();
        let frac = &scaled - (whole << (bits as usize));
        let num = frac.to_string().parse::<f64>().unwrap();
        num / (bits as f64).exp2()
    }

    fn poly(text: &str) -> RealExpPoly {
        RealExpPoly::parse(text).unwrap()
    }

    fn shifts(vals: &[u64]) -> Vec<BigUint> {
        vals.iter().map(|&v| BigUint::from(v)).collect()
    }

    #[test]
    fn filter_parsing_round_trips() {
        assert_eq!(RangeFilter::parse("all").unwrap().kind(), FilterKind::All);
        assert_eq!(RangeFilter::parse("primes").unwrap().kind(), FilterKind::Primes);
        assert_eq!(
            RangeFilter::parse("ap: 3, 7").unwrap().kind(),
            FilterKind::Ap { c: 3, q: 7 }
        );
        assert_eq!(
            RangeFilter::parse("primes-ap:1,4").unwrap().kind(),
            FilterKind::PrimesAp { a: 1, q: 4 }
        );
        assert!(RangeFilter::parse("ap:7,3").is_err());
        assert!(RangeFilter::parse("nonsense").is_err());
        assert!(RangeFilter::all().clamped(5, 5).is_err());
    }

    #[test]
    fn filtered_counts() {
        assert_eq!(filtered_count(&RangeFilter::all(), 8).unwrap(), 8);
        let ap = RangeFilter::new(FilterKind::Ap { c: 1, q: 3 }).unwrap();
        // [8, 16): 10, 13 → 2 members.
        assert_eq!(filtered_count(&ap, 8).unwrap(), 2);
        let pr = RangeFilter::new(FilterKind::Primes).unwrap();
        // [8, 16): 11, 13.
        assert_eq!(filtered_count(&pr, 8).unwrap(), 2);
        let clamped = RangeFilter::all().clamped(4, 6).unwrap();
        assert_eq!(filtered_count(&clamped, 4).unwrap(), 2);
    }

    #[test]
    fn zero_phase_sum_is_the_filtered_count() {
        // P(n) = n has zero fractional part, so every term is exactly 1.
        let f = poly("x^0.5");
        let p = [Rat::zero(), Rat::one()];
        let filter = RangeFilter::new(FilterKind::Primes).unwrap();
        let s = exp_sum(&f, &shifts(&[0]), &[0], &p, &filter, 64, 1e-10, Precision::default())
            .unwrap();
        let count = filtered_count(&filter, 64).unwrap() as f64;
        assert!((s.re - count).abs() <= s.rad + 1e-9);
        assert!(s.im.abs() <= s.rad + 1e-9);
    }

    #[test]
    fn two_term_sum_matches_high_precision_sqrt() {
        // Range [4, 6) via clamp: e(√4) + e(√5) = 1 + e({√5}).
        let f = poly("x^0.5");
        let filter = RangeFilter::all().clamped(4, 6).unwrap();
        let s = exp_sum(&f, &shifts(&[0]), &[1], &[], &filter, 4, 1e-12, Precision::default())
            .unwrap();
        let frac5 = sqrt_frac_oracle(5, 120);
        let expect_re = 1.0 + (TAU * frac5).cos();
        let expect_im = (TAU * frac5).sin();
        assert!((s.re - expect_re).abs() <= s.rad + 1e-9, "re {} vs {}", s.re, expect_re);
        assert!((s.im - expect_im).abs() <= s.rad + 1e-9);
    }

    #[test]
    fn prime_filter_keeps_single_prime() {
        let f = poly("x^0.5");
        let filter = RangeFilter::new(FilterKind::Primes).unwrap().clamped(4, 6).unwrap();
        let s = exp_sum(&f, &shifts(&[0]), &[1], &[], &filter, 4, 1e-12, Precision::default())
            .unwrap();
        let frac5 = sqrt_frac_oracle(5, 120);
        assert!((s.re - (TAU * frac5).cos()).abs() <= s.rad + 1e-9);
        assert!((s.im - (TAU * frac5).sin()).abs() <= s.rad + 1e-9);
    }

    #[test]
    fn empty_filtered_set_gives_exact_zero() {
        let f = poly("x^0.5");
        let filter = RangeFilter::new(FilterKind::Ap { c: 0, q: 64 }).unwrap()
            .clamped(33, 40)
            .unwrap();
        let s = exp_sum(&f, &shifts(&[0]), &[1], &[], &filter, 33, 1e-10, Precision::default())
            .unwrap();
        assert_eq!(s, ComplexBall::zero());
    }

    #[test]
    fn conjugate_symmetry_of_opposite_frequencies() {
        let f = poly("x^1.5");
        for n_lo in [32u64, 257] {
            let a = exp_sum(
                &f,
                &shifts(&[0, 2]),
                &[1, -2],
                &[],
                &RangeFilter::all(),
                n_lo,
                1e-12,
                Precision::default(),
            )
            .unwrap();
            let b = exp_sum(
                &f,
                &shifts(&[0, 2]),
                &[-1, 2],
                &[],
                &RangeFilter::all(),
                n_lo,
                1e-12,
                Precision::default(),
            )
            .unwrap();
            assert!(a.consistent_with(&b.conj()));
        }
    }

    #[test]
    fn progressions_partition_the_full_sum() {
        let f = poly("x^1.5");
        let q = 3u64;
        let full = exp_sum(
            &f,
            &shifts(&[0]),
            &[1],
            &[],
            &RangeFilter::all(),
            100,
            1e-12,
            Precision::default(),
        )
        .unwrap();
        let mut re = 0.0;
        let mut im = 0.0;
        let mut rad = 0.0;
        for c in 0..q {
            let part = exp_sum(
                &f,
                &shifts(&[0]),
                &[1],
                &[],
                &RangeFilter::new(FilterKind::Ap { c, q }).unwrap(),
                100,
                1e-12,
                Precision::default(),
            )
            .unwrap();
            re += part.re;
            im += part.im;
            rad += part.rad;
        }
        let combined = ComplexBall { re, im, rad: rad + 1e-12 };
        assert!(full.consistent_with(&combined));
    }

    #[test]
    fn rejects_degenerate_inputs() {
        let f = poly("x^0.5");
        let e = exp_sum(
            &f,
            &shifts(&[0]),
            &[0],
            &[Rat::one()],
            &RangeFilter::all(),
            4,
            1e-10,
            Precision::default(),
        );
        assert!(e.is_err()); // m = 0 and P constant
        let e = exp_sum(
            &f,
            &shifts(&[0, 2]),
            &[1],
            &[],
            &RangeFilter::all(),
            4,
            1e-10,
            Precision::default(),
        );
        assert!(e.is_err()); // length mismatch
    }
}
