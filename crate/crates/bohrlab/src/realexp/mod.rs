//! Polynomials with real exponents and their analytic machinery.
//!
//! A [`RealExpPoly`] is a finite sum `F(x) = Σ dᵢ·x^(ρᵢ)` with exact rational
//! coefficients and exponents `0 ≤ ρ₁ < … < ρ_r`. The interesting regime for
//! the string-finding pipeline is a non-integer leading exponent; `ℓ`, the
//! number of Taylor shifts the machinery needs, is `⌊ρ_r⌋ + 1`.
//!
//! Besides parsing and rigorous fractional-part evaluation this module hosts
//! the symbol-level tools used by the downstream experiments: generalized
//! binomial coefficients, the interference gap `η`, linear Taylor
//! combinations `Σⱼ mⱼ F(x+hⱼ)` collapsed to a lower-degree polynomial with
//! an explicit error exponent, and the closed-form exponential-sum bound.

mod parse;

pub use parse::{parse_decimal, rat_to_string};

use crate::rigor::{eval_enclosure, PowTerm, RigorousReal};
use crate::{Error, Precision, Rat, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// `F(x) = Σ dᵢ·x^(ρᵢ)` with strictly increasing rational exponents ≥ 0 and
/// a nonzero leading coefficient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RealExpPoly {
    terms: Vec<(Rat, Rat)>, // (coefficient, exponent), exponents ascending
}

impl RealExpPoly {
    /// Builds a polynomial from raw (coefficient, exponent) pairs: sorts by
    /// exponent, merges duplicates, drops vanished terms.
    pub fn new(terms: Vec<(Rat, Rat)>) -> Result<Self> {
        let mut terms = terms;
        terms.sort_by(|a, b| a.1.cmp(&b.1));
        let mut merged: Vec<(Rat, Rat)> = Vec::with_capacity(terms.len());
        for (c, e) in terms {
            if e.is_negative() {
                return Err(Error::Invalid(format!("negative exponent {e}")));
            }
            match merged.last_mut() {
                Some((lc, le)) if *le == e => *lc += c,
                _ => merged.push((c, e)),
            }
        }
        merged.retain(|(c, _)| !c.is_zero());
        if merged.is_empty() {
            return Err(Error::Invalid("polynomial has no nonzero terms".into()));
        }
        Ok(RealExpPoly { terms: merged })
    }

    /// Parses the text form `"d1*x^r1 + d2*x^r2 + …"`.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(parse::parse_terms(text)?)
    }

    /// Terms as (coefficient, exponent) pairs, exponents strictly ascending.
    pub fn terms(&self) -> &[(Rat, Rat)] {
        &self.terms
    }

    /// Number of terms `r`.
    pub fn r(&self) -> usize {
        self.terms.len()
    }

    /// Leading exponent `ρ_r`.
    pub fn leading_exp(&self) -> &Rat {
        &self.terms.last().expect("nonempty by construction").1
    }

    /// Leading coefficient `d_r`.
    pub fn leading_coeff(&self) -> &Rat {
        &self.terms.last().expect("nonempty by construction").0
    }

    /// `ℓ = ⌊ρ_r⌋ + 1`, the shift count used by all tuple machinery.
    pub fn ell(&self) -> usize {
        let e = self.leading_exp();
        let fl = e.numer().div_floor(e.denom());
        fl.to_usize().expect("exponent floor fits in usize") + 1
    }

    /// True iff the leading exponent is not an integer, the regime the
    /// string-existence theorem requires.
    pub fn theorem_eligible(&self) -> bool {
        !self.leading_exp().denom().is_one()
    }

    /// Fractional part `{ρ_r}` of the leading exponent.
    pub fn leading_frac(&self) -> Rat {
        let e = self.leading_exp();
        e - Rat::from_integer(e.numer().div_floor(e.denom()))
    }

    /// Power terms for `F(n + shift)` with an extra rational multiplier on
    /// every coefficient; the shared builder behind evaluation call sites.
    pub(crate) fn terms_at(&self, base: &BigUint, multiplier: &Rat) -> Vec<PowTerm> {
        self.terms
            .iter()
            .map(|(c, e)| PowTerm::new(&(c * multiplier), base.clone(), e))
            .collect()
    }
}

impl std::fmt::Display for RealExpPoly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for (k, (c, e)) in self.terms.iter().enumerate().rev() {
            let lead = k + 1 == self.terms.len();
            if !lead {
                write!(f, " {} ", if c.is_negative() { "-" } else { "+" })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            let mag = c.abs();
            if e.is_zero() {
                write!(f, "{}", rat_to_string(&mag))?;
            } else {
                if !mag.is_one() {
                    write!(f, "{}*", rat_to_string(&mag))?;
                }
                if e.is_one() {
                    write!(f, "x")?;
                } else {
                    write!(f, "x^{}", rat_to_string(e))?;
                }
            }
        }
        Ok(())
    }
}

/// Generalized binomial coefficient `C(ρ, n) = ρ(ρ−1)…(ρ−n+1)/n!`, with
/// `C(ρ, 0) = 1`.
pub fn gen_binom(rho: &Rat, n: u64) -> Rat {
    let mut num = Rat::one();
    let mut fact = Rat::one();
    for k in 0..n {
        num *= rho - Rat::from_integer(BigInt::from(k));
        fact *= Rat::from_integer(BigInt::from(k + 1));
    }
    num / fact
}

/// Falling factorial `ρ(ρ−1)…(ρ−n+1)`; empty product (1) at `n = 0`.
pub fn falling_factorial(rho: &Rat, n: u64) -> Rat {
    let mut acc = Rat::one();
    for k in 0..n {
        acc *= rho - Rat::from_integer(BigInt::from(k));
    }
    acc
}

/// Interference gap `η = min{(1 − {ρ_r})/2, ρ_r − ρ_{r−1}}/2`, with the
/// second argument dropped for single-term polynomials (no lower term to
/// interfere). Strictly positive whenever the leading exponent is not an
/// integer; integer leading exponents are rejected.
pub fn eta(poly: &RealExpPoly) -> Result<Rat> {
    if !poly.theorem_eligible() {
        return Err(Error::Invalid("eta requires a non-integer leading exponent".into()));
    }
    let half = Rat::new(BigInt::one(), BigInt::from(2));
    let gap_top = (Rat::one() - poly.leading_frac()) * &half;
    let inner = if poly.r() >= 2 {
        let exps: Vec<&Rat> = poly.terms.iter().map(|(_, e)| e).collect();
        let gap_prev = exps[exps.len() - 1] - exps[exps.len() - 2];
        gap_top.min(gap_prev)
    } else {
        gap_top
    };
    Ok(inner * half)
}

/// Certified enclosure of the fractional part `{F(n)}`.
///
/// The working precision starts at `prec.start_bits` and doubles until the
/// radius drops below `target_radius` (or the ceiling trips). The midpoint is
/// reduced to `[0, 1)`; the enclosure wraps around the circle when needed.
pub fn eval_frac(
    poly: &RealExpPoly,
    n: u64,
    target_radius: f64,
    prec: Precision,
) -> Result<RigorousReal> {
    if n == 0 {
        return Err(Error::Invalid("eval_frac requires n ≥ 1".into()));
    }
    if !(target_radius > 0.0) {
        return Err(Error::Invalid("target_radius must be positive".into()));
    }
    let target_bits = (-target_radius.log2()).ceil().max(1.0) as u32;
    let terms = poly.terms_at(&BigUint::from(n), &Rat::one());
    eval_enclosure(&terms, prec, target_bits, true)
}

/// The Taylor combination `⟨m, F̄(x)⟩ = Σⱼ mⱼ·F(x + hⱼ)` collapsed into a
/// polynomial `F₁(x) = Σ b_{n,i}·x^(ρᵢ − n)` plus an error of order
/// `x^(error_exponent)`.
#[derive(Debug, Clone)]
pub struct CombinedPoly {
    /// Nonzero terms `(b_{n,i}, ρᵢ − n, n, i)`, sorted by exponent descending
    /// (leading term first). `i` is the 0-based index into the source terms.
    pub terms: Vec<(Rat, Rat, usize, usize)>,
    /// Smallest `n` with `Σⱼ mⱼ·hⱼⁿ ≠ 0`; at most `ℓ − 1`.
    pub n0: usize,
    /// `{ρ_r} + η − 1`, the exponent of the truncation error.
    pub error_exponent: Rat,
}

impl CombinedPoly {
    /// Leading coefficient `b_{n₀,r}`.
    pub fn leading_coeff(&self) -> &Rat {
        &self.terms.first().expect("nonempty by construction").0
    }

    /// Leading exponent `ρ_r − n₀`.
    pub fn leading_exp(&self) -> &Rat {
        &self.terms.first().expect("nonempty by construction").1
    }

    /// Power terms for `F₁(x)` scaled by `multiplier`, for rigorous
    /// evaluation. Exponents may be negative (base must be ≥ 1).
    #[cfg_attr(not(test), allow(dead_code))]
    pub(crate) fn terms_at(&self, base: &BigUint, multiplier: &Rat) -> Vec<PowTerm> {
        self.terms
            .iter()
            .map(|(c, e, _, _)| PowTerm::new(&(c * multiplier), base.clone(), e))
            .collect()
    }
}

/// Builds the Taylor combination of `poly` over `shifts` with integer vector
/// `m`, valid in the regime `x ≥ N` with `max|mⱼ| ≤ N^η`.
///
/// Coefficients are `b_{n,i} = (Σⱼ mⱼhⱼⁿ)·dᵢ·C(ρᵢ, n)` for `0 ≤ n < ℓ`; the
/// leading index `n₀` is the first `n` whose power sum is nonzero, and the
/// Vandermonde structure of distinct shifts guarantees `n₀ ≤ ℓ − 1` for any
/// nonzero `m`.
pub fn taylor_combination(
    poly: &RealExpPoly,
    shifts: &[BigInt],
    m: &[BigInt],
    n_scale: u64,
) -> Result<CombinedPoly> {
    let ell = poly.ell();
    if shifts.len() != m.len() || shifts.is_empty() || shifts.len() > ell {
        return Err(Error::Invalid(format!(
            "need between 1 and ℓ = {ell} shifts with matching multipliers, got {} and {}",
            shifts.len(),
            m.len()
        )));
    }
    if m.iter().all(|v| v.is_zero()) {
        return Err(Error::Invalid("multiplier vector m must be nonzero".into()));
    }
    for w in shifts.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::Invalid("shifts must be strictly increasing".into()));
        }
    }
    if n_scale == 0 {
        return Err(Error::Invalid("scale N must be positive".into()));
    }
    let eta_v = eta(poly)?;
    // Power sums S_n = Σⱼ mⱼ·hⱼⁿ for n = 0..ℓ−1.
    let mut power_sums: Vec<BigInt> = Vec::with_capacity(ell);
    let mut pows: Vec<BigInt> = vec![BigInt::one(); shifts.len()];
    for _ in 0..ell {
        let s: BigInt = m.iter().zip(&pows).map(|(mj, hj)| mj * hj).sum();
        power_sums.push(s);
        for (p, h) in pows.iter_mut().zip(shifts) {
            *p *= h;
        }
    }
    let n0 = power_sums
        .iter()
        .position(|s| !s.is_zero())
        .expect("nonzero m over distinct shifts has a nonzero power sum below ℓ");
    let mut terms: Vec<(Rat, Rat, usize, usize)> = Vec::new();
    for (n, s) in power_sums.iter().enumerate().skip(n0) {
        if s.is_zero() {
            continue;
        }
        let s_rat = Rat::from_integer(s.clone());
        for (i, (d, rho)) in poly.terms.iter().enumerate() {
            let b = &s_rat * d * gen_binom(rho, n as u64);
            if b.is_zero() {
                continue;
            }
            terms.push((b, rho - Rat::from_integer(BigInt::from(n)), n, i));
        }
    }
    terms.sort_by(|a, b| b.1.cmp(&a.1));
    debug_assert!(!terms.is_empty());
    let error_exponent = poly.leading_frac() + eta_v - Rat::one();
    Ok(CombinedPoly { terms, n0, error_exponent })
}

/// Closed-form exponential-sum bound
/// `X^(1−1/K) + X((ln X)^k/g)^(1/K) + X(g/X^(q+2))^(1/(4QK−2K))`
/// with `K = 2^k`, `Q = 2^q`. Natural logarithm; no implied constant.
pub fn bkm_bound(x: f64, g: f64, k: u32, q: u32) -> Result<f64> {
    if !(x >= 2.0) {
        return Err(Error::Invalid("bkm_bound requires X ≥ 2".into()));
    }
    if k == 0 || q == 0 {
        return Err(Error::Invalid("bkm_bound requires k, q ≥ 1".into()));
    }
    let cap = x.powi(q as i32 + 2);
    if !(1.0 <= g && g <= cap) {
        return Err(Error::Invalid(format!("g = {g} outside [1, X^(q+2) = {cap}]")));
    }
    let kk = (1u64 << k) as f64; // K = 2^k
    let qq = (1u64 << q) as f64; // Q = 2^q
    let t1 = x.powf(1.0 - 1.0 / kk);
    let t2 = x * (x.ln().powi(k as i32) / g).powf(1.0 / kk);
    let t3 = x * (g / cap).powf(1.0 / (4.0 * qq * kk - 2.0 * kk));
    Ok(t1 + t2 + t3)
}
