//! Empirical checks of the four distribution hypotheses for the certified
//! set `B = {n : ({F(n+h₁)}, …, {F(n+h_ℓ)}) ∈ U}`, plus the classical
//! Bombieri–Vinogradov error sum.
//!
//! Every check reduces to one rigorous membership scan over `[N, 2N)`
//! followed by exact residue bookkeeping. Membership is three-valued:
//! points the precision ceiling cannot decide are never counted on either
//! side — they are carried in the report as data.

use crate::equidist::{RangeFilter, SemiOpenBox};
use crate::primes;
use crate::realexp::RealExpPoly;
use crate::rigor::{certify_fractional, Verdict};
use crate::tuples::ShiftedTuple;
use crate::{par, Error, Precision, Rat, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Which hypothesis a report describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Prime density inside B against the Mertens-style normalizer.
    H1,
    /// Bombieri–Vinogradov-style deviation sum for B over all residues.
    H2,
    /// The same over primes, restricted to admissible residues.
    H3,
    /// Concentration: no single progression holds a bloated share of B.
    H4,
    /// The classical error sum for π or ψ (no set B involved).
    Bv,
}

/// Worst deviation for one modulus.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorstCase {
    pub q: u64,
    /// The maximizing residue (or residue class representative).
    pub residue: u64,
    pub deviation: f64,
}

/// Outcome of a hypothesis check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypReport {
    pub hypothesis: Hypothesis,
    pub n: u64,
    /// θ for the modulus cutoff, where applicable.
    pub theta: Option<f64>,
    pub lhs: f64,
    pub normalizer: f64,
    /// `lhs / normalizer`; the normalizer is validated positive.
    pub ratio: f64,
    /// Per-q worst cases, deviation descending.
    pub worst: Vec<WorstCase>,
    /// Members the precision ceiling could not decide (excluded from lhs
    /// and normalizer alike).
    pub unknown: u64,
}

impl HypReport {
    fn new(
        hypothesis: Hypothesis,
        n: u64,
        theta: Option<f64>,
        lhs: f64,
        normalizer: f64,
        mut worst: Vec<WorstCase>,
        unknown: u64,
    ) -> Result<Self> {
        if !(normalizer > 0.0) {
            return Err(Error::Invalid(format!(
                "degenerate input: normalizer {normalizer} must be positive"
            )));
        }
        worst.sort_by(|a, b| b.deviation.total_cmp(&a.deviation));
        Ok(HypReport { hypothesis, n, theta, lhs, normalizer, ratio: lhs / normalizer, worst, unknown })
    }
}

/// Largest modulus included by the cutoff `N^θ`.
fn modulus_cutoff(n: u64, theta: f64, strict: bool) -> u64 {
    let bound = (n as f64).powf(theta);
    let q = bound.floor() as u64;
    if strict && (q as f64) >= bound {
        q.saturating_sub(1).max(1)
    } else {
        q.max(1)
    }
}

fn check_theta(theta: f64, upper: f64) -> Result<()> {
    if !(theta > 0.0 && theta < upper) {
        return Err(Error::Invalid(format!("θ must lie in (0, {upper}), got {theta}")));
    }
    Ok(())
}

/// Three-valued membership of n in B: all ℓ fractional parts inside their
/// box intervals. `Out` on any coordinate decides the whole vector even if
/// another coordinate is undecidable.
fn membership(
    poly: &RealExpPoly,
    shifts: &[BigUint],
    bx: &SemiOpenBox,
    n: u64,
    prec: Precision,
) -> Result<Verdict> {
    let n_big = BigUint::from(n);
    let mut all_in = true;
    for (h, (u, v)) in shifts.iter().zip(bx.bounds()) {
        let terms = poly.terms_at(&(&n_big + h), &Rat::one());
        let (verdict, _) = certify_fractional(&terms, prec, |r| r.verdict_in_interval(u, v))?;
        match verdict {
            Verdict::In => {}
            Verdict::Out => return Ok(Verdict::Out),
            Verdict::Unknown => all_in = false,
        }
    }
    Ok(if all_in { Verdict::In } else { Verdict::Unknown })
}

fn effective_prec(target_radius: f64, prec: Precision) -> Result<Precision> {
    if !(target_radius > 0.0) {
        return Err(Error::Invalid("target_radius must be positive".into()));
    }
    let bits = (-target_radius.log2()).ceil().max(1.0) as u32;
    Ok(Precision { start_bits: prec.start_bits.max(bits), max_bits: prec.max_bits.max(bits) })
}

/// Certified members of B among the filtered integers of `[N, 2N)`,
/// ascending, plus the count of undecidable points.
fn certified_members(
    poly: &RealExpPoly,
    tuple: &ShiftedTuple,
    bx: &SemiOpenBox,
    filter: &RangeFilter,
    n: u64,
    target_radius: f64,
    prec: Precision,
) -> Result<(Vec<u64>, u64)> {
    if n < 1 {
        return Err(Error::Invalid("range start must be ≥ 1".into()));
    }
    if bx.dim() != tuple.ell() {
        return Err(Error::Invalid(format!(
            "box dimension {} must equal tuple ℓ = {}",
            bx.dim(),
            tuple.ell()
        )));
    }
    let prec = effective_prec(target_radius, prec)?;
    let shifts = &tuple.shifts()[..tuple.ell()];
    let (lo, hi) = filter.intersect(n, 2 * n);
    if lo >= hi {
        return Ok((Vec::new(), 0));
    }
    let chunks = par::chunk_ranges(lo, hi, 1 << 13);
    let parts: Vec<Result<(Vec<u64>, u64)>> = par::map_ordered(&chunks, |&(a, b)| {
        let mut members = Vec::new();
        let mut unknown = 0u64;
        let mut err = None;
        filter.for_each_in(a, b, |v| {
            if err.is_some() {
                return;
            }
            match membership(poly, shifts, bx, v, prec) {
                Ok(Verdict::In) => members.push(v),
                Ok(Verdict::Out) => {}
                Ok(Verdict::Unknown) => unknown += 1,
                Err(e) => err = Some(e),
            }
        })?;
        match err {
            Some(e) => Err(e),
            None => Ok((members, unknown)),
        }
    });
    let mut members = Vec::new();
    let mut unknown = 0u64;
    for part in parts {
        let (m, u) = part?;
        members.extend(m);
        unknown += u;
    }
    Ok((members, unknown))
}

/// Counts filtered n ∈ [N, 2N) certified inside the box, and separately the
/// points no precision level could decide.
pub fn count_b(
    poly: &RealExpPoly,
    tuple: &ShiftedTuple,
    bx: &SemiOpenBox,
    filter: &RangeFilter,
    n: u64,
    target_radius: f64,
    prec: Precision,
) -> Result<(u64, u64)> {
    let (members, unknown) = certified_members(poly, tuple, bx, filter, n, target_radius, prec)?;
    Ok((members.len() as u64, unknown))
}

fn shift_as_u64(h: &BigUint, n: u64) -> Result<u64> {
    h.to_u64()
        .filter(|&v| v.checked_add(2 * n).is_some())
        .ok_or_else(|| Error::RangeTooLarge(format!("shift {h} too large for window at N = {n}")))
}

/// Hypothesis 1: primes occupy their fair share of B.
///
/// `lhs = (1/d)·Σᵢ #{n ∈ B ∩ [N, 2N) : n + hᵢ prime}` against the
/// normalizer `count_B / log N`; the density lemma predicts ratio → 1.
pub fn h1_ratio(
    poly: &RealExpPoly,
    tuple: &ShiftedTuple,
    bx: &SemiOpenBox,
    n: u64,
    target_radius: f64,
    prec: Precision,
) -> Result<HypReport> {
    let (members, unknown) =
        certified_members(poly, tuple, bx, &RangeFilter::all(), n, target_radius, prec)?;
    let shifts: Vec<u64> =
        tuple.shifts().iter().map(|h| shift_as_u64(h, n)).collect::<Result<_>>()?;
    let mut prime_hits = 0u64;
    for &v in &members {
        for &h in &shifts {
            if primes::is_prime(v + h) {
                prime_hits += 1;
            }
        }
    }
    let lhs = prime_hits as f64 / tuple.d() as f64;
    let normalizer = members.len() as f64 / (n as f64).ln();
    HypReport::new(Hypothesis::H1, n, None, lhs, normalizer, Vec::new(), unknown)
}

/// Exact per-q maxima of `|#{members ≡ c} − members/q|` over residues c,
/// as (q, argmax c, deviation) with the deviation exact before rounding.
fn residue_deviations(members: &[u64], total: u64, q_max: u64) -> Vec<WorstCase> {
    let mut out = Vec::with_capacity(q_max as usize);
    for q in 1..=q_max {
        let mut buckets = vec![0u64; q as usize];
        for &v in members {
            buckets[(v % q) as usize] += 1;
        }
        let mut best_c = 0u64;
        let mut best_num = BigInt::zero(); // |q·count_c − total|, exact
        for (c, &cnt) in buckets.iter().enumerate() {
            let num = (BigInt::from(q) * BigInt::from(cnt) - BigInt::from(total)).abs();
            if num > best_num {
                best_num = num;
                best_c = c as u64;
            }
        }
        let deviation = best_num.to_f64().unwrap_or(f64::INFINITY) / q as f64;
        out.push(WorstCase { q, residue: best_c, deviation });
    }
    out
}

/// Hypothesis 2: B is well-distributed in progressions. Exact double sum
/// `Σ_{q ≤ N^θ} max_c |count_B(c mod q) − count_B/q|`, normalized by
/// `count_B`.
pub fn h2_bv_sum(
    poly: &RealExpPoly,
    tuple: &ShiftedTuple,
    bx: &SemiOpenBox,
    n: u64,
    theta: f64,
    target_radius: f64,
    prec: Precision,
) -> Result<HypReport> {
    check_theta(theta, 1.0)?;
    let (members, unknown) =
        certified_members(poly, tuple, bx, &RangeFilter::all(), n, target_radius, prec)?;
    let q_max = modulus_cutoff(n, theta, false);
    let worst = residue_deviations(&members, members.len() as u64, q_max);
    let lhs: f64 = worst.iter().map(|w| w.deviation).sum();
    let normalizer = members.len() as f64;
    HypReport::new(Hypothesis::H2, n, Some(theta), lhs, normalizer, worst, unknown)
}

/// Hypothesis 3: the prime members of B (via the shift `n + h` prime) are
/// well-distributed among admissible residues:
/// `Σ_{q < N^θ} max_{(c+h, q)=1} |count(c mod q) − total/φ(q)|`.
#[allow(clippy::too_many_arguments)]
pub fn h3_prime_bv_sum(
    poly: &RealExpPoly,
    tuple: &ShiftedTuple,
    bx: &SemiOpenBox,
    h: u64,
    n: u64,
    theta: f64,
    target_radius: f64,
    prec: Precision,
) -> Result<HypReport> {
    check_theta(theta, 1.0)?;
    if h.checked_add(2 * n).is_none() {
        return Err(Error::RangeTooLarge(format!("shift {h} too large for window at N = {n}")));
    }
    let (members, unknown) =
        certified_members(poly, tuple, bx, &RangeFilter::all(), n, target_radius, prec)?;
    let prime_members: Vec<u64> =
        members.iter().copied().filter(|&v| primes::is_prime(v + h)).collect();
    let total = prime_members.len() as u64;
    let q_max = modulus_cutoff(n, theta, true);
    let mut worst = Vec::with_capacity(q_max as usize);
    for q in 1..=q_max {
        let phi = primes::euler_phi(q);
        let mut buckets = vec![0u64; q as usize];
        for &v in &prime_members {
            buckets[(v % q) as usize] += 1;
        }
        let mut best_c = 0u64;
        let mut best_num = BigInt::from(-1);
        for (c, &cnt) in buckets.iter().enumerate() {
            if num_integer::gcd(c as u64 + h, q) != 1 {
                continue;
            }
            let num = (BigInt::from(phi) * BigInt::from(cnt) - BigInt::from(total)).abs();
            if num > best_num {
                best_num = num;
                best_c = c as u64;
            }
        }
        if best_num.is_negative() {
            continue; // no admissible residue (q = 1 always has one)
        }
        let deviation = best_num.to_f64().unwrap_or(f64::INFINITY) / phi as f64;
        worst.push(WorstCase { q, residue: best_c, deviation });
    }
    let lhs: f64 = worst.iter().map(|w| w.deviation).sum();
    let normalizer = (total.max(1)) as f64;
    HypReport::new(Hypothesis::H3, n, Some(theta), lhs, normalizer, worst, unknown)
}

/// Hypothesis 4: concentration. `max_{q ≤ N^θ, c} q·count_B(c mod q)/count_B`,
/// reported with the maximizing progression.
pub fn h4_concentration(
    poly: &RealExpPoly,
    tuple: &ShiftedTuple,
    bx: &SemiOpenBox,
    n: u64,
    theta: f64,
    target_radius: f64,
    prec: Precision,
) -> Result<HypReport> {
    check_theta(theta, 1.0)?;
    let (members, unknown) =
        certified_members(poly, tuple, bx, &RangeFilter::all(), n, target_radius, prec)?;
    let total = members.len() as u64;
    if total == 0 {
        return Err(Error::Invalid("degenerate input: B has no certified members".into()));
    }
    let q_max = modulus_cutoff(n, theta, false);
    let mut worst = Vec::with_capacity(q_max as usize);
    for q in 1..=q_max {
        let mut buckets = vec![0u64; q as usize];
        for &v in &members {
            buckets[(v % q) as usize] += 1;
        }
        let (c, cnt) =
            buckets.iter().enumerate().max_by_key(|&(_, &cnt)| cnt).expect("q ≥ 1 buckets");
        worst.push(WorstCase {
            q,
            residue: c as u64,
            deviation: (q * cnt) as f64 / total as f64,
        });
    }
    let lhs = worst.iter().map(|w| w.deviation).fold(0.0, f64::max);
    HypReport::new(Hypothesis::H4, n, Some(theta), lhs, 1.0, worst, unknown)
}

/// Which counting function the classical error sum uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BvMode {
    /// π(N; a, q): prime counts.
    Pi,
    /// ψ(N; a, q): Chebyshev log-weighted prime powers.
    Psi,
}

/// Classical Bombieri–Vinogradov error sum
/// `Σ_{q ≤ N^θ} max_{(a,q)=1} |f(N; a, q) − f(N)/φ(q)|` for f = π or ψ,
/// reported against the envelope `N/(log N)^D`.
pub fn classic_bv_sum(n: u64, theta: f64, mode: BvMode, d: u32) -> Result<HypReport> {
    check_theta(theta, 0.5)?;
    if n < 3 {
        return Err(Error::Invalid("need N ≥ 3".into()));
    }
    let q_max = modulus_cutoff(n, theta, false);
    // One pass over primes (and prime powers in ψ mode), bucketing all
    // moduli simultaneously.
    let mut pi_buckets: Vec<Vec<u64>> = (1..=q_max).map(|q| vec![0u64; q as usize]).collect();
    let mut psi_buckets: Vec<Vec<f64>> = match mode {
        BvMode::Psi => (1..=q_max).map(|q| vec![0f64; q as usize]).collect(),
        BvMode::Pi => Vec::new(),
    };
    let mut pi_total = 0u64;
    let mut psi_total = 0f64;
    primes::for_each_prime(2, n + 1, |p| {
        pi_total += 1;
        let lp = (p as f64).ln();
        if matches!(mode, BvMode::Psi) {
            psi_total += lp;
        }
        for (qi, q) in (1..=q_max).enumerate() {
            let r = (p % q) as usize;
            pi_buckets[qi][r] += 1;
            if matches!(mode, BvMode::Psi) {
                psi_buckets[qi][r] += lp;
            }
        }
    })?;
    if matches!(mode, BvMode::Psi) {
        for (m, lp) in primes::higher_power_entries(n) {
            psi_total += lp;
            for (qi, q) in (1..=q_max).enumerate() {
                psi_buckets[qi][(m % q) as usize] += lp;
            }
        }
    }
    let mut worst = Vec::with_capacity(q_max as usize);
    for (qi, q) in (1..=q_max).enumerate() {
        let phi = primes::euler_phi(q);
        let mut best_a = 0u64;
        let mut best: Option<f64> = None;
        let mut best_exact = BigInt::from(-1);
        for a in 0..q {
            if num_integer::gcd(a, q) != 1 {
                continue;
            }
            match mode {
                BvMode::Pi => {
                    let num = (BigInt::from(phi) * BigInt::from(pi_buckets[qi][a as usize])
                        - BigInt::from(pi_total))
                    .abs();
                    if num > best_exact {
                        best_exact = num.clone();
                        best = Some(num.to_f64().unwrap_or(f64::INFINITY) / phi as f64);
                        best_a = a;
                    }
                }
                BvMode::Psi => {
                    let dev = (psi_buckets[qi][a as usize] - psi_total / phi as f64).abs();
                    if best.is_none_or(|b| dev > b) {
                        best = Some(dev);
                        best_a = a;
                    }
                }
            }
        }
        if let Some(deviation) = best {
            worst.push(WorstCase { q, residue: best_a, deviation });
        }
    }
    let lhs: f64 = worst.iter().map(|w| w.deviation).sum();
    let normalizer = n as f64 / (n as f64).ln().powi(d as i32);
    HypReport::new(Hypothesis::Bv, n, Some(theta), lhs, normalizer, worst, 0)
}
