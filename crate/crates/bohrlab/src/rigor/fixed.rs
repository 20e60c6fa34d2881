//! Fixed-point evaluation of sums of power terms `(num/den) · base^(p/q)`.
//!
//! All inputs are exact integers and rationals, so a term value can be pinned
//! between integer bounds at any binary scale `s` using only integer powers,
//! integer k-th roots and exact division. No floating point, no rounding-mode
//! games: the result is a midpoint with an error measured in units of `2^-s`,
//! exact (zero radius) whenever the underlying root and divisions terminate.
//!
//! Term value ∈ [lo, hi]·2^-s with:
//!   base^(p/q)·2^s pinned by floor/ceil of integer roots, then the rational
//!   coefficient applied with floor/ceil division. Summation adds midpoints
//!   and error counts.

use super::{Dyadic, RigorousReal, Verdict};
use crate::{Error, Precision, Rat, Result};
use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// One term `(num/den) · base^(exp_num/exp_den)` of an evaluation.
///
/// `exp_num/exp_den` must be in lowest terms with `exp_den ≥ 1`; negative
/// exponents are allowed only for `base ≥ 1`.
#[derive(Debug, Clone)]
pub struct PowTerm {
    pub num: BigInt,
    pub den: BigUint,
    pub base: BigUint,
    pub exp_num: BigInt,
    pub exp_den: BigUint,
}

impl PowTerm {
    pub fn new(coeff: &Rat, base: BigUint, exp: &Rat) -> Self {
        debug_assert!(!exp.denom().is_negative());
        PowTerm {
            num: coeff.numer().clone(),
            den: coeff.denom().to_biguint().expect("reduced rational has positive denominator"),
            base,
            exp_num: exp.numer().clone(),
            exp_den: exp.denom().to_biguint().expect("reduced rational has positive denominator"),
        }
    }
}

/// Hard cap on `exp_den · s` to keep integer root extraction tractable.
const ROOT_BITS_CAP: u64 = 1 << 25;

fn ceil_div(a: &BigInt, b: &BigInt) -> BigInt {
    -(-a).div_floor(b)
}

/// Integer bounds `lo ≤ base^(p/q)·2^s ≤ hi` (tight to within 1 ulp).
fn power_bounds(base: &BigUint, p: &BigInt, q: &BigUint, s: u32) -> Result<(BigInt, BigInt)> {
    let one = BigUint::one();
    if base.is_zero() {
        // 0^0 = 1 by convention; 0^positive = 0. Negative exponents at zero
        // are rejected upstream when terms are formed.
        let v: BigInt = if p.is_zero() { BigInt::one() << s } else { BigInt::zero() };
        return Ok((v.clone(), v));
    }
    if p.is_zero() || base == &one {
        let v = BigInt::one() << s;
        return Ok((v.clone(), v));
    }
    let p_abs = p.magnitude();
    let p_u32 = p_abs
        .to_u32()
        .ok_or_else(|| Error::RangeTooLarge("power-term exponent numerator".into()))?;
    let q_u64 = q.to_u64().ok_or_else(|| Error::RangeTooLarge("exponent denominator".into()))?;
    if q_u64.saturating_mul(s as u64) > ROOT_BITS_CAP {
        return Err(Error::PrecisionCeiling { ceiling: s });
    }
    let q_u32 = q_u64 as u32;
    let r = base.pow(p_u32);
    if !p.is_negative() {
        if q_u64 == 1 {
            let v = BigInt::from(r) << s;
            return Ok((v.clone(), v));
        }
        // w = floor((r · 2^(q·s))^(1/q)) pins r^(1/q)·2^s within one ulp.
        let x = &r << (q_u64 * s as u64) as usize;
        let w = x.nth_root(q_u32);
        let exact = w.pow(q_u32) == x;
        let lo = BigInt::from(w);
        let hi = if exact { lo.clone() } else { &lo + 1 };
        return Ok((lo, hi));
    }
    // Negative exponent: base ≥ 2 here, so u = base^(|p|/q) ≥ 2^(1/q) > 1.
    // Pin u·2^s by t (and exactness), then bound 2^(2s)/(u·2^s).
    let (t, t_exact) = if q_u64 == 1 {
        (&r << s, true)
    } else {
        let x = &r << (q_u64 * s as u64) as usize;
        let w = x.nth_root(q_u32);
        let exact = w.pow(q_u32) == x;
        (w, exact)
    };
    let two_2s = BigUint::one() << (2 * s as u64) as usize;
    if t_exact {
        let (d, m) = two_2s.div_rem(&t);
        let lo = BigInt::from(d);
        let hi = if m.is_zero() { lo.clone() } else { &lo + 1 };
        Ok((lo, hi))
    } else {
        // u·2^s ∈ (t, t+1) strictly, so the value lies in
        // (2^(2s)/(t+1), 2^(2s)/t); round both ends outward.
        let lo = BigInt::from(&two_2s / (&t + BigUint::one()));
        let hi = BigInt::from(&two_2s / &t) + 1;
        Ok((lo, hi))
    }
}

/// Integer bounds on the full sum at scale `s`: value ∈ [lo, hi]·2^-s.
fn sum_bounds(terms: &[PowTerm], s: u32) -> Result<(BigInt, BigInt)> {
    let mut lo_sum = BigInt::zero();
    let mut hi_sum = BigInt::zero();
    for t in terms {
        if t.exp_num.is_negative() && t.base.is_zero() {
            return Err(Error::Invalid("negative exponent at base zero".into()));
        }
        let (wlo, whi) = power_bounds(&t.base, &t.exp_num, &t.exp_den, s)?;
        let den = BigInt::from(t.den.clone());
        let (a, b) = if t.num.is_negative() { (&whi, &wlo) } else { (&wlo, &whi) };
        lo_sum += (&t.num * a).div_floor(&den);
        hi_sum += ceil_div(&(&t.num * b), &den);
    }
    Ok((lo_sum, hi_sum))
}

/// Midpoint–radius enclosure of `Σ terms` at scale `s`.
fn eval_at_scale(terms: &[PowTerm], s: u32, fractional: bool) -> Result<RigorousReal> {
    let (lo, hi) = sum_bounds(terms, s)?;
    let mut mid = (&lo + &hi).div_floor(&BigInt::from(2));
    let rad = &hi - &mid; // covers both sides since mid is the floor midpoint
    if fractional {
        mid = mid.mod_floor(&(BigInt::one() << s));
    }
    Ok(RigorousReal::from_parts(
        Dyadic::new(mid, -(s as i64)),
        Dyadic::new(rad, -(s as i64)),
        fractional,
    ))
}

/// Evaluates `Σ terms` to a radius below `2^-target_bits`, escalating the
/// working precision geometrically within `prec`.
///
/// With `fractional = true` the midpoint is reduced to `[0, 1)` and the
/// result carries circle semantics.
pub fn eval_enclosure(
    terms: &[PowTerm],
    prec: Precision,
    target_bits: u32,
    fractional: bool,
) -> Result<RigorousReal> {
    let mut s = prec.start_bits.max(target_bits + 8);
    loop {
        let r = eval_at_scale(terms, s, fractional)?;
        if r.rad_below(target_bits) {
            return Ok(r);
        }
        if s >= prec.max_bits {
            return Err(Error::PrecisionCeiling { ceiling: prec.max_bits });
        }
        s = (s * 2).min(prec.max_bits);
    }
}

/// Runs a three-valued membership check on the fractional part of `Σ terms`,
/// doubling precision until the check decides or the ceiling is reached.
///
/// Returns the verdict together with the number of fixed-point bits used by
/// the final evaluation (a cheap rigour probe for diagnostics).
pub fn certify_fractional<F>(terms: &[PowTerm], prec: Precision, check: F) -> Result<(Verdict, u32)>
where
    F: Fn(&RigorousReal) -> Verdict,
{
    let mut s = prec.start_bits;
    loop {
        let r = eval_at_scale(terms, s, true)?;
        let v = check(&r);
        if v != Verdict::Unknown {
            return Ok((v, s));
        }
        if s >= prec.max_bits {
            return Ok((Verdict::Unknown, s));
        }
        s = (s * 2).min(prec.max_bits);
    }
}
