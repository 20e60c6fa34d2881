//! Admissible shift tuples with exact integer elimination relations.
//!
//! The construction takes `ℓ ≤ d` and produces shifts `h₁ < … < h_d` such
//! that (a) the set avoids a full residue class modulo every prime (it is
//! *admissible*, so sieve machinery applies to `n + hⱼ`), and (b) each extra
//! shift `h_s`, `s > ℓ`, satisfies exact integer relations
//! `Σⱼ b_{s,j}·hⱼⁿ = h_sⁿ` for `0 ≤ n < ℓ` — the moment identities that let
//! a Taylor combination collapse `F(n + h_s)` onto the first `ℓ` shifts.
//!
//! Everything here is exact: the basis expansion runs in big rationals, the
//! published scale factor is the product of the reduced denominators, and
//! the moment identities are asserted in integer arithmetic before a tuple
//! is ever returned.

use crate::primes::primorial;
use crate::realexp::RealExpPoly;
use crate::rigor::{certify_fractional, eval_enclosure, PowTerm, RigorousReal, Verdict};
use crate::{par, primes, Error, Precision, Rat, Result};
use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Largest supported d; the scale factor grows superpolynomially in ℓ.
pub const MAX_D: usize = 30;

/// Shift tuple `h₁ < … < h_d` with elimination matrix `B` and scale factor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShiftedTuple {
    ell: usize,
    d: usize,
    h: Vec<BigUint>,
    /// Rows for s = ℓ+1..=d, each of length ℓ: integer coefficients b_{s,j}.
    b: Vec<Vec<BigInt>>,
    q_scale: BigUint,
}

impl ShiftedTuple {
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn shifts(&self) -> &[BigUint] {
        &self.h
    }

    /// Elimination rows, `rows()[s − ℓ − 1][j]` = b_{s,j} (1-based s, j).
    pub fn rows(&self) -> &[Vec<BigInt>] {
        &self.b
    }

    pub fn q_scale(&self) -> &BigUint {
        &self.q_scale
    }

    /// Largest |b_{s,j}|, zero for d = ℓ.
    pub fn max_abs_b(&self) -> BigUint {
        self.b
            .iter()
            .flatten()
            .map(|v| v.magnitude().clone())
            .max()
            .unwrap_or_else(BigUint::zero)
    }

    /// Verifies every structural invariant; used on construction and on
    /// deserialization of externally supplied tuples.
    pub fn validate(&self) -> Result<()> {
        if self.ell < 1 || self.ell > self.d || self.d > MAX_D {
            return Err(Error::Invalid(format!(
                "need 1 ≤ ℓ ≤ d ≤ {MAX_D}, got ℓ = {}, d = {}",
                self.ell, self.d
            )));
        }
        if self.h.len() != self.d || self.b.len() != self.d - self.ell {
            return Err(Error::Invalid("tuple shape mismatch".into()));
        }
        for w in self.h.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::Invalid("shifts must be strictly increasing".into()));
            }
        }
        // Moment identities: Σⱼ b_{s,j}·hⱼⁿ = h_sⁿ for n = 0..ℓ−1.
        for (row, hs) in self.b.iter().zip(&self.h[self.ell..]) {
            let hs = BigInt::from(hs.clone());
            let mut hs_pow = BigInt::one();
            let mut h_pows: Vec<BigInt> = vec![BigInt::one(); self.ell];
            for _ in 0..self.ell {
                let lhs: BigInt = row.iter().zip(&h_pows).map(|(b, hp)| b * hp).sum();
                if lhs != hs_pow {
                    return Err(Error::Invalid("moment identity violated".into()));
                }
                for (hp, h) in h_pows.iter_mut().zip(&self.h) {
                    *hp *= BigInt::from(h.clone());
                }
                hs_pow *= &hs;
            }
        }
        let adm = check_admissible(&self.h);
        if !adm.admissible {
            return Err(Error::Invalid(format!(
                "tuple is not admissible (covering prime {})",
                adm.covering_prime.unwrap_or(0)
            )));
        }
        Ok(())
    }
}

/// Serialized form: big integers as decimal strings (JSON numbers cannot
/// carry them losslessly).
#[derive(Serialize, Deserialize)]
struct TupleJson {
    ell: usize,
    d: usize,
    h: Vec<String>,
    #[serde(rename = "B")]
    b: Vec<Vec<String>>,
    q_scale: String,
}

impl Serialize for ShiftedTuple {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        TupleJson {
            ell: self.ell,
            d: self.d,
            h: self.h.iter().map(|v| v.to_string()).collect(),
            b: self.b.iter().map(|row| row.iter().map(|v| v.to_string()).collect()).collect(),
            q_scale: self.q_scale.to_string(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for ShiftedTuple {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as DeError;
        let raw = TupleJson::deserialize(d)?;
        let parse_u = |s: &String| s.parse::<BigUint>().map_err(|e| DeError::custom(e.to_string()));
        let parse_i = |s: &String| s.parse::<BigInt>().map_err(|e| DeError::custom(e.to_string()));
        let tuple = ShiftedTuple {
            ell: raw.ell,
            d: raw.d,
            h: raw.h.iter().map(parse_u).collect::<std::result::Result<_, _>>()?,
            b: raw
                .b
                .iter()
                .map(|row| row.iter().map(parse_i).collect::<std::result::Result<_, _>>())
                .collect::<std::result::Result<_, _>>()?,
            q_scale: parse_u(&raw.q_scale)?,
        };
        tuple.validate().map_err(|e| DeError::custom(e.to_string()))?;
        Ok(tuple)
    }
}

/// Exact Gauss–Jordan inverse of a square rational matrix.
fn invert(mat: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = mat.len();
    let mut a: Vec<Vec<Rat>> = mat.to_vec();
    let mut inv: Vec<Vec<Rat>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let p = a[col][col].clone();
        for x in a[col].iter_mut().chain(inv[col].iter_mut()) {
            *x /= &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..n {
                let t = &f * &a[col][c];
                a[r][c] -= t;
                let t = &f * &inv[col][c];
                inv[r][c] -= t;
            }
        }
    }
    Some(inv)
}

/// Builds the admissible tuple for (ℓ, d): shifts `hⱼ = (j−1)·P(d)` for
/// `j ≤ ℓ` and `h_s = q·s·P(d)` for `s > ℓ`, where `q` is the product of the
/// reduced denominators appearing in the expansion of the standard basis in
/// the Vandermonde basis `ν(h₁)…ν(h_ℓ)`.
pub fn build_admissible(ell: usize, d: usize) -> Result<ShiftedTuple> {
    if ell < 1 || ell > d || d > MAX_D {
        return Err(Error::Invalid(format!("need 1 ≤ ℓ ≤ d ≤ {MAX_D}, got ℓ = {ell}, d = {d}")));
    }
    let p = primorial(d as u64);
    let mut h: Vec<BigUint> = (0..ell).map(|j| BigUint::from(j) * &p).collect();
    // Vandermonde M[i][j] = hⱼ₊₁^i and its exact inverse; c_{k,j} = inv[j][k]
    // expands e_k = Σⱼ c_{k,j}·ν(hⱼ).
    let mat: Vec<Vec<Rat>> = (0..ell)
        .map(|i| {
            (0..ell)
                .map(|j| {
                    let hj = BigInt::from(h[j].clone());
                    Rat::from_integer(num_traits::pow::pow(hj, i))
                })
                .collect()
        })
        .collect();
    let inv = invert(&mat).expect("distinct shifts give a nonsingular Vandermonde matrix");
    // q = Π_{k,j} denominator(c_{k,j}) in lowest terms (0 contributes 1).
    let mut q_scale = BigUint::one();
    for row in &inv {
        for entry in row {
            q_scale *= entry.denom().to_biguint().expect("reduced denominators are positive");
        }
    }
    let mut b: Vec<Vec<BigInt>> = Vec::with_capacity(d - ell);
    for s in (ell + 1)..=d {
        let hs = &q_scale * BigUint::from(s) * &p;
        // b_{s,j} = Σ_k h_sᵏ⁻¹·c_{k,j}; integral because q divides h_s and
        // c_{1,j} is integral (h₁ = 0 makes ν(h₁) the first basis vector).
        let hs_int = BigInt::from(hs.clone());
        let mut row: Vec<BigInt> = Vec::with_capacity(ell);
        for inv_row in inv.iter().take(ell) {
            let mut acc = Rat::zero();
            let mut hs_pow = BigInt::one();
            for c in inv_row.iter().take(ell) {
                acc += Rat::from_integer(hs_pow.clone()) * c;
                hs_pow *= &hs_int;
            }
            if !acc.denom().is_one() {
                return Err(Error::Invalid("elimination produced a non-integer relation".into()));
            }
            row.push(acc.numer().clone());
        }
        b.push(row);
        h.push(hs);
    }
    let tuple = ShiftedTuple { ell, d, h, b, q_scale };
    tuple.validate()?;
    Ok(tuple)
}

/// Result of the residue-covering test.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// For each prime p ≤ d (ascending): (p, n) with n + hⱼ ≢ 0 mod p ∀j.
    pub witnesses: Vec<(u64, u64)>,
    /// First prime whose residues are fully covered, when inadmissible.
    pub covering_prime: Option<u64>,
}

/// Checks Def-2.1 admissibility of a shift set: for every prime `p ≤ |h|`
/// the forbidden residues `{−hⱼ mod p}` must not cover all of `ℤ/pℤ`.
/// Primes above `|h|` can never be covered by `|h|` residues.
pub fn check_admissible(h: &[BigUint]) -> AdmissibilityReport {
    assert!(!h.is_empty(), "admissibility needs at least one shift");
    let d = h.len() as u64;
    let mut witnesses = Vec::new();
    for p in (2..=d).filter(|&p| primes::is_prime(p)) {
        let p_big = BigUint::from(p);
        let mut forbidden = vec![false; p as usize];
        for hj in h {
            let r = (hj % &p_big).to_u64().expect("residue fits") as usize;
            forbidden[(p as usize - r) % p as usize] = true;
        }
        match forbidden.iter().position(|&f| !f) {
            Some(n) => witnesses.push((p, n as u64)),
            None => {
                return AdmissibilityReport {
                    admissible: false,
                    witnesses,
                    covering_prime: Some(p),
                }
            }
        }
    }
    AdmissibilityReport { admissible: true, witnesses, covering_prime: None }
}

/// Rigorous enclosure of `F(x + h_s) − Σⱼ b_{s,j}·F(x + hⱼ)`.
///
/// `s` is 1-based with `ℓ < s ≤ d`. The relation collapses the first ℓ
/// Taylor orders exactly, so the value decays like `x^({ρ_r} − 1)`.
pub fn relation_residual(
    poly: &RealExpPoly,
    tuple: &ShiftedTuple,
    s: usize,
    x: u64,
    target_radius: f64,
    prec: Precision,
) -> Result<RigorousReal> {
    check_poly_tuple(poly, tuple)?;
    if s <= tuple.ell || s > tuple.d {
        return Err(Error::Invalid(format!("s must lie in (ℓ, d] = ({}, {}]", tuple.ell, tuple.d)));
    }
    if x == 0 {
        return Err(Error::Invalid("x must be ≥ 1".into()));
    }
    if !(target_radius > 0.0) {
        return Err(Error::Invalid("target_radius must be positive".into()));
    }
    let target_bits = (-target_radius.log2()).ceil().max(1.0) as u32;
    let terms = residual_terms(poly, tuple, s, x);
    eval_enclosure(&terms, prec, target_bits, false)
}

fn residual_terms(poly: &RealExpPoly, tuple: &ShiftedTuple, s: usize, x: u64) -> Vec<PowTerm> {
    let x_big = BigUint::from(x);
    let mut terms = poly.terms_at(&(&x_big + &tuple.h[s - 1]), &Rat::one());
    let row = &tuple.b[s - 1 - tuple.ell];
    for (j, bj) in row.iter().enumerate() {
        if bj.is_zero() {
            continue;
        }
        let base = &x_big + &tuple.h[j];
        terms.extend(poly.terms_at(&base, &-Rat::from_integer(bj.clone())));
    }
    terms
}

fn check_poly_tuple(poly: &RealExpPoly, tuple: &ShiftedTuple) -> Result<()> {
    if !poly.theorem_eligible() {
        return Err(Error::Invalid("polynomial must have a non-integer leading exponent".into()));
    }
    if poly.ell() != tuple.ell {
        return Err(Error::Invalid(format!(
            "polynomial ℓ = {} does not match tuple ℓ = {}",
            poly.ell(),
            tuple.ell
        )));
    }
    Ok(())
}

/// Box shrink factor `Δ = ε/(2ℓ·max|b_{s,j}|)`; `Δ = ε` when there are no
/// extra shifts (d = ℓ).
pub fn shrink_delta(tuple: &ShiftedTuple, eps: &Rat) -> Result<Rat> {
    if eps <= &Rat::zero() || eps >= &Rat::one() {
        return Err(Error::Invalid(format!("ε must lie in (0, 1), got {eps}")));
    }
    if tuple.d == tuple.ell {
        return Ok(eps.clone());
    }
    let maxb = Rat::from_integer(BigInt::from(tuple.max_abs_b()));
    Ok(eps / (Rat::from_integer(BigInt::from(2 * tuple.ell)) * maxb))
}

/// Outcome of a rigorous inclusion scan over `[lo, hi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InclusionReport {
    pub delta: Rat,
    /// Points n certified in the Δ-box for all j ≤ ℓ.
    pub b_hits: u64,
    /// (n, j) with n a B-point but ∥F(n + hⱼ)∥ ≥ ε certified, 1-based j.
    pub violations: Vec<(u64, usize)>,
    /// (n, j) memberships the precision ceiling could not decide (j as in
    /// violations; j ≤ ℓ entries are box tests, j > ℓ are norm tests).
    pub unknown: Vec<(u64, usize)>,
    /// One past the largest violating n, or `lo` when none violate.
    pub n0_empirical: u64,
}

/// Scans `[lo, hi)`: every n whose first ℓ shifted values are certified in
/// `[0, Δ)` must have all d shifted values within ε of an integer. Violations
/// and undecidable memberships are reported, never dropped.
pub fn inclusion_check(
    poly: &RealExpPoly,
    tuple: &ShiftedTuple,
    eps: &Rat,
    lo: u64,
    hi: u64,
    prec: Precision,
) -> Result<InclusionReport> {
    check_poly_tuple(poly, tuple)?;
    if lo < 1 || lo >= hi {
        return Err(Error::Invalid(format!("need 1 ≤ lo < hi, got [{lo}, {hi})")));
    }
    let delta = shrink_delta(tuple, eps)?;
    let zero = Rat::zero();
    let chunks = par::chunk_ranges(lo, hi, 1 << 14);
    struct Part {
        b_hits: u64,
        violations: Vec<(u64, usize)>,
        unknown: Vec<(u64, usize)>,
    }
    let parts: Vec<Result<Part>> = par::map_ordered(&chunks, |&(a, b)| {
        let mut part = Part { b_hits: 0, violations: Vec::new(), unknown: Vec::new() };
        for n in a..b {
            let n_big = BigUint::from(n);
            let mut in_box = true;
            for j in 0..tuple.ell {
                let terms = poly.terms_at(&(&n_big + &tuple.h[j]), &Rat::one());
                let (v, _) = certify_fractional(&terms, prec, |r| {
                    r.verdict_in_interval(&zero, &delta)
                })?;
                match v {
                    Verdict::In => {}
                    Verdict::Out => {
                        in_box = false;
                        break;
                    }
                    Verdict::Unknown => {
                        part.unknown.push((n, j + 1));
                        in_box = false;
                        break;
                    }
                }
            }
            if !in_box {
                continue;
            }
            part.b_hits += 1;
            for j in tuple.ell..tuple.d {
                let terms = poly.terms_at(&(&n_big + &tuple.h[j]), &Rat::one());
                let (v, _) = certify_fractional(&terms, prec, |r| r.verdict_dist_lt(eps))?;
                match v {
                    Verdict::In => {}
                    Verdict::Out => part.violations.push((n, j + 1)),
                    Verdict::Unknown => part.unknown.push((n, j + 1)),
                }
            }
        }
        Ok(part)
    });
    let mut report = InclusionReport {
        delta,
        b_hits: 0,
        violations: Vec::new(),
        unknown: Vec::new(),
        n0_empirical: lo,
    };
    for part in parts {
        let part = part?;
        report.b_hits += part.b_hits;
        report.violations.extend(part.violations);
        report.unknown.extend(part.unknown);
    }
    if let Some(&(n, _)) = report.violations.last() {
        report.n0_empirical = n + 1;
    }
    Ok(report)
}
