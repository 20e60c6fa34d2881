//! Experiment orchestration: the full pipeline from a target set `U` to a
//! report of consecutive-prime strings inside `A = {n : {F(n)} ∈ U}`.
//!
//! A run proceeds in the order the underlying mechanism dictates:
//!
//! 1. [`normalize_target`] rotates `U` so the working target becomes the
//!    symmetric window `U′ = (1−ε, 1) ∪ [0, ε)`, i.e. `∥x∥ < ε`, and records
//!    the rotation constant `c`. Scans thereafter use `F + c`.
//! 2. An admissible tuple `h₁ < … < h_d` is built for `ℓ = ⌈ρ_r⌉` and the
//!    box half-width is shrunk to `Δ` so that certifying the ℓ leading
//!    coordinates in `[0, Δ)` forces (asymptotically) all `d` coordinates
//!    within `ε`.
//! 3. The scan over `[lo, hi)` runs in two independent modes that are merged
//!    at the end:
//!    * **tuple-window**: every `n` whose ℓ leading coordinates certify in
//!      `[0, Δ)` opens a window `{n + h₁, …, n + h_d}`; when every window
//!      coordinate also certifies `∥(F+c)(n+hⱼ)∥ < ε`, runs of globally
//!      consecutive primes inside the window become strings. This exercises
//!      the localization mechanism.
//!    * **direct**: every prime `p ∈ [lo, hi)` is tested for `{F(p)} ∈ U`
//!      outright; runs of consecutive member primes become strings. This
//!      mode is unconditional and guarantees desk-scale results.
//! 4. Every reported string is re-verified: membership of each member under
//!    doubled precision and halved radius, and consecutiveness against a
//!    fresh sieve of the covering range. Undecidable points are never
//!    counted as members and break string eligibility.
//!
//! Reports serialize deterministically: identical configurations produce
//! byte-identical JSON (timing is kept out of the serialized form).

use std::collections::BTreeSet;
use std::io::Write as _;
use std::time::Instant;

use num_bigint::BigUint;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::equidist::{frac_vector, RangeFilter, SemiOpenBox};
use crate::hypcheck::{self, BvMode, HypReport};
use crate::primes;
use crate::realexp::{parse_decimal, rat_to_string, RealExpPoly};
use crate::rigor::{certify_fractional, Verdict};
use crate::tuples::{build_admissible, shrink_delta, ShiftedTuple};
use crate::{par, rat_to_f64, Error, Precision, Rat, Result};

/// Hard ceiling for sieve-backed verification (segmented sieve range).
const SIEVE_CEILING: u64 = 1 << 40;

/// Scan chunk sizes; fixed so the parallel and sequential executions share
/// one work decomposition and therefore one result.
const WINDOW_CHUNK: u64 = 1 << 14;
const PRIME_CHUNK: u64 = 1 << 16;

// ---------------------------------------------------------------------------
// Target sets

/// Union of disjoint semi-open intervals `[u, v) ⊆ [0, 1)`, sorted ascending
/// with adjacent constituents merged.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalUnion {
    ivs: Vec<(Rat, Rat)>,
}

impl IntervalUnion {
    pub fn new(ivs: Vec<(Rat, Rat)>) -> Result<Self> {
        if ivs.is_empty() {
            return Err(Error::Invalid("target set must be a nonempty interval union".into()));
        }
        let one = Rat::one();
        for (u, v) in &ivs {
            if u.is_negative() || *v > one || u >= v {
                return Err(Error::Invalid(format!(
                    "interval [{}, {}) must satisfy 0 ≤ u < v ≤ 1",
                    rat_to_string(u),
                    rat_to_string(v)
                )));
            }
        }
        let mut ivs = ivs;
        ivs.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(Rat, Rat)> = Vec::with_capacity(ivs.len());
        for (u, v) in ivs {
            match merged.last_mut() {
                Some((_, pv)) if u < *pv => {
                    return Err(Error::Invalid(format!(
                        "intervals overlap at {}",
                        rat_to_string(&u)
                    )));
                }
                Some((_, pv)) if u == *pv => *pv = v,
                _ => merged.push((u, v)),
            }
        }
        Ok(IntervalUnion { ivs: merged })
    }

    /// Parses decimal-string endpoint pairs, e.g. `[("0.9", "1"), ("0", "0.1")]`.
    pub fn parse(pairs: &[(String, String)]) -> Result<Self> {
        let ivs = pairs
            .iter()
            .map(|(u, v)| Ok((parse_decimal(u)?, parse_decimal(v)?)))
            .collect::<Result<Vec<_>>>()?;
        IntervalUnion::new(ivs)
    }

    pub fn intervals(&self) -> &[(Rat, Rat)] {
        &self.ivs
    }

    pub fn measure(&self) -> Rat {
        self.ivs.iter().map(|(u, v)| v - u).sum()
    }
}

/// Rotates the target union so the working window is symmetric around 0.
///
/// Picks the longest constituent interval `[u, v)` — treating a wrap-around
/// pair `[w, 1) ∪ [0, z)` as the single circular interval `[w, 1 + z)` — and
/// returns `ε = (v − u)/2` together with the rotation `c = 1 − (u + v)/2
/// mod 1`, so that `(1−ε, 1) ∪ [0, ε) ⊆ U + c mod 1`. Ties between equally
/// long constituents resolve to the smallest left endpoint.
pub fn normalize_target(u: &IntervalUnion) -> Result<(Rat, Rat)> {
    let ivs = u.intervals();
    let n = ivs.len();
    let one = Rat::one();
    let wraps = n >= 2 && ivs[0].0.is_zero() && ivs[n - 1].1 == one;
    let mut cands: Vec<(Rat, Rat)> = Vec::with_capacity(n);
    if wraps {
        cands.push((ivs[n - 1].0.clone(), &ivs[0].1 + &one));
        cands.extend(ivs[1..n - 1].iter().cloned());
    } else {
        cands.extend(ivs.iter().cloned());
    }
    let best = cands
        .into_iter()
        .max_by(|a, b| {
            let la = &a.1 - &a.0;
            let lb = &b.1 - &b.0;
            la.cmp(&lb).then_with(|| b.0.cmp(&a.0))
        })
        .expect("nonempty by construction");
    let (u0, v0) = best;
    let eps = (&v0 - &u0) / Rat::from_integer(2.into());
    let mid = (&u0 + &v0) / Rat::from_integer(2.into());
    let mut c = &one - &mid;
    if c.is_negative() {
        c += &one;
    }
    if c >= one {
        c -= Rat::one();
    }
    Ok((eps, c))
}

// ---------------------------------------------------------------------------
// Configuration

fn default_theta() -> f64 {
    0.3
}
fn default_delta_discount() -> f64 {
    0.98
}
fn default_target_radius() -> f64 {
    (2.0f64).powi(-(Precision::DEFAULT_TARGET_BITS as i32))
}
fn default_start_bits() -> u32 {
    Precision::default().start_bits
}
fn default_max_bits() -> u32 {
    Precision::default().max_bits
}
fn default_unknown_budget() -> f64 {
    1e-6
}
fn default_disc_sample() -> u64 {
    2000
}
fn default_max_strings() -> u64 {
    10_000
}

/// Full description of one experiment; JSON-serializable and echoed into the
/// report so every artifact names its own provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Polynomial source text, e.g. `"x^0.5"` or `"0.25*x^1.5 + 3*x^0.4"`.
    pub poly: String,
    /// Target union as decimal-string endpoint pairs of `[u, v)` intervals.
    pub target: Vec<(String, String)>,
    /// Length of the consecutive-prime strings sought.
    pub m: usize,
    /// Tuple size; `None` selects `max(ℓ, m + 2)`.
    #[serde(default)]
    pub d: Option<usize>,
    /// Scan range `[lo, hi)`; `lo` must clear the largest tuple shift.
    pub lo: u64,
    pub hi: u64,
    /// Modulus exponent for the hypothesis sub-reports.
    #[serde(default = "default_theta")]
    pub theta: f64,
    /// Discount in the heuristic window string-length rule `⌈δ·C⁻¹·log d⌉`;
    /// recorded for transparency — the constant `C` is not effective, so the
    /// rule never prunes results.
    #[serde(default = "default_delta_discount")]
    pub delta_discount: f64,
    /// Target enclosure radius for certified evaluations.
    #[serde(default = "default_target_radius")]
    pub target_radius: f64,
    /// Fixed-point working precision: starting and ceiling bit counts.
    #[serde(default = "default_start_bits")]
    pub start_bits: u32,
    #[serde(default = "default_max_bits")]
    pub max_bits: u32,
    /// Tolerated fraction of undecided scan points before the run is flagged.
    #[serde(default = "default_unknown_budget")]
    pub unknown_budget: f64,
    /// `N` for the hypothesis sub-reports; `None` picks the largest power of
    /// two with `[N, 2N) ⊆ [lo, hi)`, and they are skipped if none exists.
    #[serde(default)]
    pub hyp_at: Option<u64>,
    /// Sample-size cap per dyadic block in the discrepancy series.
    #[serde(default = "default_disc_sample")]
    pub disc_sample: u64,
    /// Cap on reported strings per search mode (degenerate targets such as
    /// the full circle make every window of `m` adjacent primes a string).
    #[serde(default = "default_max_strings")]
    pub max_strings: u64,
    /// Optional output paths consumed by the CLI driver.
    #[serde(default)]
    pub report_json: Option<String>,
    #[serde(default)]
    pub report_csv_prefix: Option<String>,
}

impl ExperimentConfig {
    /// A configuration with library defaults for everything optional.
    pub fn new(poly: &str, target: &[(&str, &str)], m: usize, lo: u64, hi: u64) -> Self {
        ExperimentConfig {
            poly: poly.to_string(),
            target: target.iter().map(|(u, v)| (u.to_string(), v.to_string())).collect(),
            m,
            d: None,
            lo,
            hi,
            theta: default_theta(),
            delta_discount: default_delta_discount(),
            target_radius: default_target_radius(),
            start_bits: default_start_bits(),
            max_bits: default_max_bits(),
            unknown_budget: default_unknown_budget(),
            hyp_at: None,
            disc_sample: default_disc_sample(),
            max_strings: default_max_strings(),
            report_json: None,
            report_csv_prefix: None,
        }
    }

    pub fn precision(&self) -> Precision {
        Precision { start_bits: self.start_bits, max_bits: self.max_bits }
    }

    /// Validates every field and resolves the polynomial and target union.
    pub fn resolve(&self) -> Result<(RealExpPoly, IntervalUnion)> {
        let poly = RealExpPoly::parse(&self.poly)?;
        if !poly.theorem_eligible() {
            return Err(Error::Invalid(format!(
                "leading exponent {} is an integer; the fractional-part \
                 pipeline needs a non-integer leading exponent",
                poly.leading_exp()
            )));
        }
        let target = IntervalUnion::parse(&self.target)?;
        if self.m == 0 {
            return Err(Error::Invalid("string length m must be ≥ 1".into()));
        }
        if self.lo >= self.hi {
            return Err(Error::Invalid(format!("empty scan range [{}, {})", self.lo, self.hi)));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::Invalid(format!("θ must lie in (0, 1), got {}", self.theta)));
        }
        if !(self.delta_discount > 0.0 && self.delta_discount <= 1.0) {
            return Err(Error::Invalid(format!(
                "string-length discount must lie in (0, 1], got {}",
                self.delta_discount
            )));
        }
        if !(self.target_radius > 0.0) {
            return Err(Error::Invalid("target_radius must be positive".into()));
        }
        if self.start_bits == 0 || self.max_bits < self.start_bits {
            return Err(Error::Invalid("precision bits must satisfy 0 < start ≤ max".into()));
        }
        if !(0.0..=1.0).contains(&self.unknown_budget) {
            return Err(Error::Invalid("unknown budget must lie in [0, 1]".into()));
        }
        if self.disc_sample == 0 || self.disc_sample > 5000 {
            return Err(Error::Invalid("disc_sample must lie in [1, 5000]".into()));
        }
        Ok((poly, target))
    }
}

// ---------------------------------------------------------------------------
// Report types

/// How a string was found.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    /// Localized inside a fully certified tuple window (the mechanism the
    /// construction is built around); diameter obeys `K ≤ h_d − h₁`.
    TupleWindow,
    /// Found by the unconditional prime-by-prime membership scan.
    Direct,
}

/// One string of `m` consecutive primes, all certified members of `A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeString {
    /// The member primes, ascending and globally consecutive.
    pub primes: Vec<u64>,
    /// Diameter `K = last − first`.
    pub k: u64,
    pub provenance: Provenance,
    /// Window origin `n` for tuple-window strings.
    pub window_n: Option<u64>,
}

/// Scan tallies. "Unknown" means the precision ceiling was reached without a
/// verdict; such points are excluded from every count and from string
/// eligibility.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScanCounts {
    /// `n` whose ℓ leading coordinates certified inside `[0, Δ)`.
    pub b_hits: u64,
    /// Primes in `[lo, hi)` certified members of `A` by the direct scan.
    pub prime_hits: u64,
    /// Undecided points across both scans.
    pub unknown_points: u64,
    /// Points examined across both scans.
    pub points_scanned: u64,
    /// B-hits with a certified coordinate violation at the ε stage —
    /// empirical evidence the scan sits below the inclusion threshold N₀.
    pub window_violations: u64,
    /// Strings dropped because re-verification could not re-certify a
    /// member (expected to stay 0; any other value is an anomaly).
    pub reverify_dropped: u64,
}

/// Full experiment outcome; serializes deterministically (timing excluded).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    /// The configuration that produced this report.
    pub config: ExperimentConfig,
    pub ell: usize,
    pub d: usize,
    /// Normalized half-width ε (exact decimal/fraction string).
    pub epsilon: String,
    /// Rotation constant c with `(1−ε, 1) ∪ [0, ε) ⊆ U + c mod 1`.
    pub shift_c: String,
    /// Tuple shifts `h₁ < … < h_d` and the integrality scale.
    pub shifts: Vec<String>,
    pub q_scale: String,
    /// Shrunk gate half-width Δ (exact string).
    pub delta: String,
    /// First scan point after the last certified window violation (`lo`
    /// when none occurred): the empirical stand-in for the inclusion
    /// threshold N₀.
    pub n0_empirical: u64,
    pub counts: ScanCounts,
    /// Whether either search mode hit the `max_strings` cap.
    pub strings_truncated: bool,
    pub strings: Vec<PrimeString>,
    /// Hypothesis sub-reports at one dyadic block (empty when the range
    /// holds no full block).
    pub hyp: Vec<HypReport>,
    /// `(N, sample size, exact discrepancy of the sampled block)` for each
    /// dyadic block `[N, 2N) ⊆ [lo, hi)` of the shifted sequence.
    pub discrepancy_series: Vec<(u64, u64, f64)>,
    /// Wall-clock seconds; excluded from serialization so that identical
    /// configurations yield byte-identical reports.
    #[serde(skip)]
    pub elapsed_seconds: f64,
}

impl ExperimentReport {
    /// Did the undecided-point fraction exceed the configured budget?
    pub fn unknown_budget_exceeded(&self) -> bool {
        let scanned = self.counts.points_scanned.max(1) as f64;
        (self.counts.unknown_points as f64) / scanned > self.config.unknown_budget
    }
}

// ---------------------------------------------------------------------------
// Scan internals

/// Adds the rotation constant to the polynomial (a degree-0 term).
fn rotated(poly: &RealExpPoly, c: &Rat) -> Result<RealExpPoly> {
    if c.is_zero() {
        return Ok(poly.clone());
    }
    let mut terms: Vec<(Rat, Rat)> = poly.terms().to_vec();
    terms.push((c.clone(), Rat::zero()));
    RealExpPoly::new(terms)
}

/// Certified three-valued check of one fractional coordinate.
fn coord_verdict<F>(poly: &RealExpPoly, x: &BigUint, prec: Precision, check: F) -> Result<Verdict>
where
    F: Fn(&crate::rigor::RigorousReal) -> Verdict,
{
    let terms = poly.terms_at(x, &Rat::one());
    Ok(certify_fractional(&terms, prec, check)?.0)
}

struct WindowChunk {
    b_hits: u64,
    unknown: u64,
    violations: Vec<u64>,
    strings: Vec<PrimeString>,
}

/// Scans `[lo, hi)` for tuple-window events and extracts window strings.
#[allow(clippy::too_many_arguments)]
fn window_scan(
    shifted: &RealExpPoly,
    tuple: &ShiftedTuple,
    shifts_u64: &[u64],
    eps: &Rat,
    delta: &Rat,
    m: usize,
    lo: u64,
    hi: u64,
    prec: Precision,
) -> Result<(Vec<PrimeString>, u64, u64, Vec<u64>)> {
    let ell = tuple.ell();
    let zero = Rat::zero();
    let chunks = par::chunk_ranges(lo, hi, WINDOW_CHUNK);
    let results: Vec<Result<WindowChunk>> = par::map_ordered(&chunks, |&(a, b)| {
        let mut out =
            WindowChunk { b_hits: 0, unknown: 0, violations: Vec::new(), strings: Vec::new() };
        for n in a..b {
            // Gate: the ℓ leading coordinates inside [0, Δ).
            let mut gate = Verdict::In;
            for h in &shifts_u64[..ell] {
                let v = coord_verdict(shifted, &BigUint::from(n + h), prec, |r| {
                    r.verdict_in_interval(&zero, delta)
                })?;
                match v {
                    Verdict::In => {}
                    Verdict::Out => {
                        gate = Verdict::Out;
                        break;
                    }
                    Verdict::Unknown => gate = Verdict::Unknown,
                }
            }
            match gate {
                Verdict::Out => continue,
                Verdict::Unknown => {
                    out.unknown += 1;
                    continue;
                }
                Verdict::In => {}
            }
            out.b_hits += 1;
            // Full window: every coordinate must satisfy ∥·∥ < ε before the
            // window may claim strings; a certified violation is evidence
            // the scan sits below N₀ and is recorded as such.
            let mut clean = true;
            for h in shifts_u64 {
                let v = coord_verdict(shifted, &BigUint::from(n + h), prec, |r| {
                    r.verdict_dist_lt(eps)
                })?;
                match v {
                    Verdict::In => {}
                    Verdict::Out => {
                        out.violations.push(n);
                        clean = false;
                        break;
                    }
                    Verdict::Unknown => {
                        out.unknown += 1;
                        clean = false;
                        break;
                    }
                }
            }
            if !clean {
                continue;
            }
            let window_primes: Vec<u64> =
                shifts_u64.iter().map(|h| n + h).filter(|&x| primes::is_prime(x)).collect();
            // Split into runs of globally consecutive primes.
            let mut run: Vec<u64> = Vec::new();
            for &p in &window_primes {
                if let Some(&last) = run.last() {
                    if (last + 1..p).any(primes::is_prime) {
                        emit_windows(&run, m, Provenance::TupleWindow, Some(n), &mut out.strings);
                        run.clear();
                    }
                }
                run.push(p);
            }
            emit_windows(&run, m, Provenance::TupleWindow, Some(n), &mut out.strings);
        }
        Ok(out)
    });
    let mut strings = Vec::new();
    let mut b_hits = 0;
    let mut unknown = 0;
    let mut violations = Vec::new();
    for r in results {
        let chunk = r?;
        b_hits += chunk.b_hits;
        unknown += chunk.unknown;
        violations.extend(chunk.violations);
        strings.extend(chunk.strings);
    }
    Ok((strings, b_hits, unknown, violations))
}

/// Emits every length-`m` window of a run of consecutive member primes.
fn emit_windows(
    run: &[u64],
    m: usize,
    provenance: Provenance,
    window_n: Option<u64>,
    out: &mut Vec<PrimeString>,
) {
    if run.len() < m {
        return;
    }
    for w in run.windows(m) {
        out.push(PrimeString {
            primes: w.to_vec(),
            k: w[m - 1] - w[0],
            provenance,
            window_n,
        });
    }
}

/// Scans primes in `[lo, hi)` for direct membership `{F(p)} ∈ U` and
/// extracts strings from runs of consecutive member primes.
fn direct_scan(
    poly: &RealExpPoly,
    target: &IntervalUnion,
    m: usize,
    lo: u64,
    hi: u64,
    prec: Precision,
) -> Result<(Vec<PrimeString>, u64, u64, u64)> {
    let lo = lo.max(2);
    if lo >= hi {
        return Ok((Vec::new(), 0, 0, 0));
    }
    let chunks = par::chunk_ranges(lo, hi, PRIME_CHUNK);
    let results: Vec<Result<Vec<(u64, Verdict)>>> = par::map_ordered(&chunks, |&(a, b)| {
        let range = primes::primes_in(a, b)?;
        range
            .primes
            .iter()
            .map(|&p| {
                let v = coord_verdict(poly, &BigUint::from(p), prec, |r| {
                    r.verdict_in_intervals(target.intervals())
                })?;
                Ok((p, v))
            })
            .collect()
    });
    let mut strings = Vec::new();
    let mut run: Vec<u64> = Vec::new();
    let (mut hits, mut unknown, mut scanned) = (0u64, 0u64, 0u64);
    for chunk in results {
        for (p, v) in chunk? {
            scanned += 1;
            match v {
                Verdict::In => {
                    hits += 1;
                    run.push(p);
                }
                Verdict::Out | Verdict::Unknown => {
                    if v == Verdict::Unknown {
                        unknown += 1;
                    }
                    emit_windows(&run, m, Provenance::Direct, None, &mut strings);
                    run.clear();
                }
            }
        }
    }
    emit_windows(&run, m, Provenance::Direct, None, &mut strings);
    Ok((strings, hits, unknown, scanned))
}

/// Re-verifies a candidate string: every member re-certified in `U` under
/// doubled precision, and consecutiveness re-checked against a fresh sieve.
fn reverify(
    s: &PrimeString,
    poly: &RealExpPoly,
    target: &IntervalUnion,
    prec: Precision,
) -> Result<bool> {
    let doubled = Precision {
        start_bits: prec.start_bits.saturating_mul(2),
        max_bits: prec.max_bits.saturating_mul(2),
    };
    for &p in &s.primes {
        let v = coord_verdict(poly, &BigUint::from(p), doubled, |r| {
            r.verdict_in_intervals(target.intervals())
        })?;
        if v != Verdict::In {
            return Ok(false);
        }
    }
    let first = s.primes[0];
    let last = *s.primes.last().expect("strings are nonempty");
    let covering = primes::primes_in(first, last + 1)?;
    Ok(covering.primes == s.primes)
}

/// Hypothesis sub-reports on one dyadic block `[N, 2N)` with the scan's own
/// box `[0, Δ)^ℓ`.
fn hyp_section(
    shifted: &RealExpPoly,
    tuple: &ShiftedTuple,
    delta: &Rat,
    cfg: &ExperimentConfig,
) -> Result<Vec<HypReport>> {
    let n = match cfg.hyp_at {
        Some(n) => {
            if n < 3 || n.checked_mul(2).is_none() {
                return Err(Error::Invalid(format!("hypothesis block start {n} out of range")));
            }
            n
        }
        None => {
            let mut best = None;
            let mut k = 2u32;
            while let Some(two_n) = 1u64.checked_shl(k + 1) {
                let n = 1u64 << k;
                if two_n > cfg.hi {
                    break;
                }
                if n >= cfg.lo.max(3) {
                    best = Some(n);
                }
                k += 1;
            }
            match best {
                Some(n) => n,
                None => return Ok(Vec::new()),
            }
        }
    };
    let bx = SemiOpenBox::new(vec![(Rat::zero(), delta.clone()); tuple.ell()])?;
    let prec = cfg.precision();
    let mut out = Vec::with_capacity(4);
    // The distribution checks condition on membership in the Δ-box, whose
    // measure Δ^ℓ can starve a desk-scale block (ℓ ≥ 2 with an amplifying
    // tuple). An empty certified block makes their ratios undefined, so
    // those rows are omitted rather than reported as 0/0.
    let (b_count, _) = hypcheck::count_b(
        shifted,
        tuple,
        &bx,
        &RangeFilter::all(),
        n,
        cfg.target_radius,
        prec,
    )?;
    if b_count > 0 {
        out.push(hypcheck::h1_ratio(shifted, tuple, &bx, n, cfg.target_radius, prec)?);
        out.push(hypcheck::h2_bv_sum(shifted, tuple, &bx, n, cfg.theta, cfg.target_radius, prec)?);
        out.push(hypcheck::h4_concentration(
            shifted,
            tuple,
            &bx,
            n,
            cfg.theta,
            cfg.target_radius,
            prec,
        )?);
    }
    if cfg.theta < 0.5 {
        out.push(hypcheck::classic_bv_sum(n, cfg.theta, BvMode::Pi, 2)?);
    }
    Ok(out)
}

/// Exact discrepancy of an evenly spaced sample of `{(F+c)(n)}` on each
/// dyadic block `[N, 2N) ⊆ [lo, hi)`. The sample points carry certified
/// enclosures; their midpoints (radius ≤ target_radius) feed the exact
/// routine, so the series is a diagnostic of equidistribution rather than a
/// certified bound.
fn disc_series(
    shifted: &RealExpPoly,
    cfg: &ExperimentConfig,
) -> Result<Vec<(u64, u64, f64)>> {
    let origin = [BigUint::zero()];
    let prec = cfg.precision();
    let mut out = Vec::new();
    let mut k = 1u32;
    while let Some(two_n) = 1u64.checked_shl(k + 1) {
        let n = 1u64 << k;
        if two_n > cfg.hi {
            break;
        }
        k += 1;
        if n < cfg.lo.max(1) {
            continue;
        }
        let sample = cfg.disc_sample.min(n);
        let idx: Vec<u64> =
            (0..sample).map(|i| n + ((i as u128 * n as u128) / sample as u128) as u64).collect();
        let pts: Vec<Result<Vec<Rat>>> = par::map_ordered(&idx, |&x| {
            let v = frac_vector(shifted, &origin, x, cfg.target_radius, prec)?;
            let mid = v.coords()[0].mid().to_rat();
            let wrapped = &mid - mid.floor();
            Ok(vec![wrapped])
        });
        let pts = pts.into_iter().collect::<Result<Vec<_>>>()?;
        let d = crate::equidist::discrepancy_exact(&pts)?;
        out.push((n, sample, rat_to_f64(&d)));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The pipeline

/// Runs the full experiment described by `cfg`.
pub fn find_strings(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let t0 = Instant::now();
    let (poly, target) = cfg.resolve()?;
    let ell = poly.ell();
    let d = cfg.d.unwrap_or_else(|| ell.max(cfg.m + 2));
    if d < ell {
        return Err(Error::Invalid(format!("tuple size d = {d} must be ≥ ℓ = {ell}")));
    }
    let tuple = build_admissible(ell, d)?;
    let (eps, c) = normalize_target(&target)?;
    let delta = shrink_delta(&tuple, &eps)?;
    let shifted = rotated(&poly, &c)?;
    let prec = cfg.precision();

    let shifts_u64: Vec<u64> = tuple
        .shifts()
        .iter()
        .map(|h| {
            h.to_u64().ok_or_else(|| {
                Error::RangeTooLarge(format!("tuple shift {h} exceeds the scan word size"))
            })
        })
        .collect::<Result<_>>()?;
    let max_shift = *shifts_u64.last().expect("tuples are nonempty");
    if cfg.lo < max_shift + 1 {
        return Err(Error::Invalid(format!(
            "scan start {} must be ≥ max shift + 1 = {}",
            cfg.lo,
            max_shift + 1
        )));
    }
    let ceiling = cfg
        .hi
        .checked_add(max_shift)
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| Error::RangeTooLarge("scan range overflows the word size".into()))?;
    if ceiling > SIEVE_CEILING {
        return Err(Error::RangeTooLarge(format!(
            "scan range reaches {ceiling}, beyond the sieve ceiling 2^40"
        )));
    }

    let (mut window_strings, b_hits, window_unknown, violations) =
        window_scan(&shifted, &tuple, &shifts_u64, &eps, &delta, cfg.m, cfg.lo, cfg.hi, prec)?;
    let (mut direct_strings, prime_hits, direct_unknown, primes_scanned) =
        direct_scan(&poly, &target, cfg.m, cfg.lo, cfg.hi, prec)?;

    // Overlapping windows can re-find one string; keep each once per mode.
    let mut seen: BTreeSet<Vec<u64>> = BTreeSet::new();
    window_strings.retain(|s| seen.insert(s.primes.clone()));
    let mut truncated = false;
    for v in [&mut window_strings, &mut direct_strings] {
        if v.len() as u64 > cfg.max_strings {
            v.truncate(cfg.max_strings as usize);
            truncated = true;
        }
    }

    let mut strings: Vec<PrimeString> = window_strings;
    strings.extend(direct_strings);
    strings.sort_by(|a, b| a.primes.cmp(&b.primes).then(a.provenance.cmp(&b.provenance)));

    let mut dropped = 0u64;
    let mut verified = Vec::with_capacity(strings.len());
    for s in strings {
        if reverify(&s, &poly, &target, prec)? {
            verified.push(s);
        } else {
            debug_assert!(false, "re-verification rejected a certified string: {s:?}");
            dropped += 1;
        }
    }

    let n0_empirical = violations.iter().max().map_or(cfg.lo, |&n| n + 1);
    let counts = ScanCounts {
        b_hits,
        prime_hits,
        unknown_points: window_unknown + direct_unknown,
        points_scanned: (cfg.hi - cfg.lo) + primes_scanned,
        window_violations: violations.len() as u64,
        reverify_dropped: dropped,
    };

    let hyp = hyp_section(&shifted, &tuple, &delta, cfg)?;
    let discrepancy_series = disc_series(&shifted, cfg)?;

    Ok(ExperimentReport {
        config: cfg.clone(),
        ell,
        d,
        epsilon: rat_to_string(&eps),
        shift_c: rat_to_string(&c),
        shifts: tuple.shifts().iter().map(|h| h.to_string()).collect(),
        q_scale: tuple.q_scale().to_string(),
        delta: rat_to_string(&delta),
        n0_empirical,
        counts,
        strings_truncated: truncated,
        strings: verified,
        hyp,
        discrepancy_series,
        elapsed_seconds: t0.elapsed().as_secs_f64(),
    })
}

// ---------------------------------------------------------------------------
// Serialization

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    /// One JSON document at `path`.
    Json,
    /// Three CSV tables at `path` + `_strings.csv`, `_hyp.csv`, `_disc.csv`.
    Csv,
}

/// Renders a report to a string in the JSON format (deterministic: fixed key
/// order, shortest round-trip floats, exact rationals as strings).
pub fn report_to_json(report: &ExperimentReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// The three CSV tables as (strings, hypothesis ratios, discrepancy series).
pub fn report_to_csv(report: &ExperimentReport) -> (String, String, String) {
    let m = report.config.m;
    let mut strings = String::from("provenance,window_n,");
    for i in 1..=m {
        strings.push_str(&format!("p{i},"));
    }
    strings.push_str("k\n");
    for s in &report.strings {
        let prov = match s.provenance {
            Provenance::TupleWindow => "tuple-window",
            Provenance::Direct => "direct",
        };
        strings.push_str(prov);
        strings.push(',');
        if let Some(n) = s.window_n {
            strings.push_str(&n.to_string());
        }
        for p in &s.primes {
            strings.push(',');
            strings.push_str(&p.to_string());
        }
        strings.push(',');
        strings.push_str(&s.k.to_string());
        strings.push('\n');
    }

    let mut hyp = String::from("hypothesis,n,theta,lhs,normalizer,ratio,unknown\n");
    for h in &report.hyp {
        let theta = h.theta.map(|t| t.to_string()).unwrap_or_default();
        hyp.push_str(&format!(
            "{:?},{},{},{},{},{},{}\n",
            h.hypothesis, h.n, theta, h.lhs, h.normalizer, h.ratio, h.unknown
        ));
    }

    let mut disc = String::from("n,points,discrepancy\n");
    for (n, pts, d) in &report.discrepancy_series {
        disc.push_str(&format!("{n},{pts},{d}\n"));
    }
    (strings, hyp, disc)
}

/// Writes a report to disk in the requested format.
pub fn emit_report(
    report: &ExperimentReport,
    format: ReportFormat,
    path: &std::path::Path,
) -> Result<()> {
    match format {
        ReportFormat::Json => {
            let mut f = std::fs::File::create(path)?;
            f.write_all(report_to_json(report)?.as_bytes())?;
        }
        ReportFormat::Csv => {
            let (s, h, d) = report_to_csv(report);
            let base = path.to_string_lossy();
            std::fs::write(format!("{base}_strings.csv"), s)?;
            std::fs::write(format!("{base}_hyp.csv"), h)?;
            std::fs::write(format!("{base}_disc.csv"), d)?;
        }
    }
    Ok(())
}

/// Parses a JSON report back (exact inverse of [`report_to_json`] up to the
/// unserialized timing field).
pub fn report_from_json(text: &str) -> Result<ExperimentReport> {
    Ok(serde_json::from_str(text)?)
}
