//! Fractional-part vectors, semi-open boxes, exact low-dimensional
//! discrepancy, the Erdős–Turán–Koksma bracket, and exponential sums with
//! dyadic decay diagnostics.

mod disc;
mod sums;

pub use disc::{discrepancy_exact, MAX_DIM, MAX_POINTS};
pub use sums::{exp_sum, filtered_count, FilterKind, RangeFilter};

use crate::accum::KahanSum;
use crate::realexp::RealExpPoly;
use crate::rigor::{eval_enclosure, RigorousReal, Verdict};
use crate::{Error, Precision, Rat, Result};
use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// A complex number known only up to a disc of radius `rad`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexBall {
    pub re: f64,
    pub im: f64,
    pub rad: f64,
}

impl ComplexBall {
    pub fn zero() -> Self {
        ComplexBall { re: 0.0, im: 0.0, rad: 0.0 }
    }

    pub fn conj(&self) -> Self {
        ComplexBall { re: self.re, im: -self.im, rad: self.rad }
    }

    pub fn magnitude(&self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Upper bound on |z| over the disc.
    pub fn magnitude_upper(&self) -> f64 {
        self.magnitude() + self.rad
    }

    /// True when the two discs intersect, i.e. the balls are consistent
    /// with a common true value.
    pub fn consistent_with(&self, other: &ComplexBall) -> bool {
        (self.re - other.re).hypot(self.im - other.im) <= self.rad + other.rad
    }
}

/// Box `Π [uᵢ, vᵢ)` with `0 ≤ uᵢ < vᵢ ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemiOpenBox {
    bounds: Vec<(Rat, Rat)>,
}

// Bounds serialize as decimal/fraction strings ("0.9", "1/3"), which JSON
// can carry exactly.
impl Serialize for SemiOpenBox {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let raw: Vec<(String, String)> = self
            .bounds
            .iter()
            .map(|(u, v)| (crate::realexp::rat_to_string(u), crate::realexp::rat_to_string(v)))
            .collect();
        raw.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SemiOpenBox {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let raw = Vec::<(String, String)>::deserialize(d)?;
        let bounds = raw
            .iter()
            .map(|(u, v)| {
                Ok((
                    crate::realexp::parse_decimal(u).map_err(|e| DeError::custom(e.to_string()))?,
                    crate::realexp::parse_decimal(v).map_err(|e| DeError::custom(e.to_string()))?,
                ))
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        SemiOpenBox::new(bounds).map_err(|e| DeError::custom(e.to_string()))
    }
}

impl SemiOpenBox {
    pub fn new(bounds: Vec<(Rat, Rat)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Invalid("box needs at least one dimension".into()));
        }
        for (u, v) in &bounds {
            if u < &Rat::zero() || u >= v || v > &Rat::one() {
                return Err(Error::Invalid(format!("need 0 ≤ u < v ≤ 1, got [{u}, {v})")));
            }
        }
        Ok(SemiOpenBox { bounds })
    }

    /// The full box `[0, 1)^ℓ`.
    pub fn unit(ell: usize) -> Result<Self> {
        SemiOpenBox::new(vec![(Rat::zero(), Rat::one()); ell.max(1)])
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(Rat, Rat)] {
        &self.bounds
    }

    pub fn measure(&self) -> Rat {
        self.bounds.iter().map(|(u, v)| v - u).product()
    }
}

/// Vector of fractional-part enclosures, one per shift.
#[derive(Debug, Clone)]
pub struct FracVector {
    coords: Vec<RigorousReal>,
}

impl FracVector {
    pub(crate) fn new(coords: Vec<RigorousReal>) -> Self {
        assert!(!coords.is_empty(), "fractional vector needs ℓ ≥ 1");
        FracVector { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[RigorousReal] {
        &self.coords
    }
}

/// Enclosures of `({F(n+h₁)}, …, {F(n+h_ℓ)})` with radii ≤ `target_radius`.
pub fn frac_vector(
    poly: &RealExpPoly,
    shifts: &[BigUint],
    n: u64,
    target_radius: f64,
    prec: Precision,
) -> Result<FracVector> {
    if shifts.is_empty() {
        return Err(Error::Invalid("need at least one shift".into()));
    }
    if n < 1 {
        return Err(Error::Invalid("n must be ≥ 1".into()));
    }
    if !(target_radius > 0.0) {
        return Err(Error::Invalid("target_radius must be positive".into()));
    }
    let target_bits = (-target_radius.log2()).ceil().max(1.0) as u32;
    let n_big = BigUint::from(n);
    let coords = shifts
        .iter()
        .map(|h| {
            let terms = poly.terms_at(&(&n_big + h), &Rat::one());
            eval_enclosure(&terms, prec, target_bits, true)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FracVector::new(coords))
}

/// Three-valued box membership: `In` iff every coordinate enclosure lies
/// inside its `[uᵢ, vᵢ)`, `Out` iff some coordinate lies outside, `Unknown`
/// when an enclosure straddles a boundary. Callers escalate precision on
/// `Unknown`.
pub fn box_membership(v: &FracVector, bx: &SemiOpenBox) -> Result<Verdict> {
    if v.dim() != bx.dim() {
        return Err(Error::Invalid(format!(
            "dimension mismatch: vector {} vs box {}",
            v.dim(),
            bx.dim()
        )));
    }
    let mut all_in = true;
    for (c, (u, vi)) in v.coords().iter().zip(bx.bounds()) {
        match c.verdict_in_interval(u, vi) {
            Verdict::In => {}
            Verdict::Out => return Ok(Verdict::Out),
            Verdict::Unknown => all_in = false,
        }
    }
    Ok(if all_in { Verdict::In } else { Verdict::Unknown })
}

/// Product weight `r(m) = Π max(|mᵢ|, 1)`.
fn lattice_weight(m: &[i64]) -> f64 {
    m.iter().map(|&v| (v.unsigned_abs().max(1)) as f64).product()
}

/// The Erdős–Turán–Koksma bracket
/// `1/(H+1) + Σ_{0<∥m∥∞≤H} (1/r(m))·|S_m|/N`,
/// with `|S_m|` taken at its enclosure upper bound so the bracket remains a
/// valid discrepancy surrogate. Frequencies may rely on conjugate symmetry:
/// a missing `m` falls back to `conj(S_{−m})`.
pub fn etk_bracket(
    spectra: &BTreeMap<Vec<i64>, ComplexBall>,
    n: u64,
    h: u32,
) -> Result<f64> {
    if n < 1 {
        return Err(Error::Invalid("point count must be ≥ 1".into()));
    }
    if h < 1 {
        return Err(Error::Invalid("frequency cutoff H must be ≥ 1".into()));
    }
    let ell = spectra
        .keys()
        .next()
        .ok_or_else(|| Error::Invalid("spectrum map is empty".into()))?
        .len();
    if ell == 0 || spectra.keys().any(|k| k.len() != ell) {
        return Err(Error::Invalid("inconsistent frequency dimensions".into()));
    }
    let mut total = 1.0 / (h as f64 + 1.0);
    let mut m = vec![-(h as i64); ell];
    loop {
        if !m.iter().all(|&v| v == 0) {
            let s = match spectra.get(&m) {
                Some(s) => *s,
                None => {
                    let neg: Vec<i64> = m.iter().map(|&v| -v).collect();
                    spectra
                        .get(&neg)
                        .map(ComplexBall::conj)
                        .ok_or_else(|| Error::Invalid(format!("missing frequency {m:?}")))?
                }
            };
            total += s.magnitude_upper() / (n as f64) / lattice_weight(&m);
        }
        // Odometer over [−H, H]^ℓ.
        let mut k = 0;
        loop {
            if k == ell {
                return Ok(total);
            }
            if m[k] < h as i64 {
                m[k] += 1;
                break;
            }
            m[k] = -(h as i64);
            k += 1;
        }
    }
}

/// Least-squares slope of `log magnitude` against `log N`.
pub fn decay_slope(series: &[(u64, f64)]) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::Invalid("slope needs at least 3 points".into()));
    }
    for w in series.windows(2) {
        if w[0].0 >= w[1].0 {
            return Err(Error::Invalid("N values must be strictly increasing".into()));
        }
    }
    if series.iter().any(|&(_, mag)| !(mag > 0.0)) {
        return Err(Error::Invalid("magnitudes must be positive".into()));
    }
    let pts: Vec<(f64, f64)> =
        series.iter().map(|&(n, mag)| ((n as f64).ln(), mag.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Ok(sxy / sxx)
}

/// Result of a partial-sum supremum scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartialSumReport {
    /// `sup over U ≤ V of |Σ_{U ≤ n < V} values[n]|`.
    pub sup: f64,
    /// The comparison envelope `C·N^α + W`.
    pub bound: f64,
    /// `sup / bound` (infinite when the envelope is zero and sup is not).
    pub ratio: f64,
}

/// Computes `sup_{U,V} |Σ_{U ≤ n < V} values[n]|` exactly over the prefix
/// sums (the supremum is the diameter of the prefix-sum point set in the
/// plane) and reports it against the envelope `C·N^α + W` with
/// `N = values.len()`.
pub fn partial_sum_sup_check(
    values: &[(f64, f64)],
    c: f64,
    alpha: f64,
    w: f64,
) -> PartialSumReport {
    let mut prefix: Vec<(f64, f64)> = Vec::with_capacity(values.len() + 1);
    let mut re = KahanSum::default();
    let mut im = KahanSum::default();
    prefix.push((0.0, 0.0));
    for &(x, y) in values {
        re.add(x);
        im.add(y);
        prefix.push((re.value(), im.value()));
    }
    let sup = diameter(&prefix);
    let bound = c * (values.len() as f64).powf(alpha) + w;
    let ratio = if sup == 0.0 && bound == 0.0 { 0.0 } else { sup / bound };
    PartialSumReport { sup, bound, ratio }
}

/// Diameter of a planar point set: convex hull, then pairwise max over the
/// (usually tiny) hull.
fn diameter(pts: &[(f64, f64)]) -> f64 {
    let hull = convex_hull(pts);
    let mut best = 0.0f64;
    for i in 0..hull.len() {
        for j in (i + 1)..hull.len() {
            let d = (hull[i].0 - hull[j].0).hypot(hull[i].1 - hull[j].1);
            best = best.max(d);
        }
    }
    best
}

fn convex_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut p: Vec<(f64, f64)> = pts.to_vec();
    p.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    p.dedup();
    if p.len() <= 2 {
        return p;
    }
    let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let chain = |iter: &mut dyn Iterator<Item = (f64, f64)>| {
        let mut half: Vec<(f64, f64)> = Vec::new();
        for pt in iter {
            while half.len() >= 2 && cross(half[half.len() - 2], half[half.len() - 1], pt) <= 0.0
            {
                half.pop();
            }
            half.push(pt);
        }
        half.pop();
        half
    };
    let mut hull = chain(&mut p.iter().copied());
    hull.extend(chain(&mut p.iter().rev().copied()));
    hull
}
