//! Text form of polynomials with real exponents.
//!
//! The accepted grammar is a sum of terms `d*x^r` with decimal-string
//! coefficients and exponents, e.g. `"0.5*x^2.7 - 3*x^0.2 + 1"`. The `*` is
//! optional, a bare `x` means exponent 1, a bare number is a constant term
//! (exponent 0), and exponents may also be written as reduced fractions
//! (`x^3/2`) so that `Display` output always parses back.

use crate::{Error, Rat, Result};
use num_bigint::BigInt;
use num_traits::{One, Pow, Signed, Zero};

/// Parses a decimal string (`"-1.25"`), an integer, or a fraction (`"3/2"`)
/// into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty numeric literal".into()));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_decimal(num)?;
        let d = parse_decimal(den)?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{s}`")));
        }
        return Ok(n / d);
    }
    let (sign, rest) = match s.strip_prefix('-') {
        Some(r) => (-1, r),
        None => (1, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = match rest.split_once('.') {
        Some((i, f)) => (i, f),
        None => (rest, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(Error::Parse(format!("malformed numeric literal `{s}`")));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(Error::Parse(format!("malformed numeric literal `{s}`")));
    }
    let digits: String = format!("{int_part}{frac_part}");
    let mant: BigInt = digits.parse().map_err(|_| Error::Parse(format!("bad digits in `{s}`")))?;
    let scale = BigInt::from(10).pow(frac_part.len() as u32);
    Ok(Rat::new(mant * sign, scale))
}

/// Renders a rational as a decimal string when its denominator is 10-smooth,
/// falling back to `p/q`.
pub fn rat_to_string(r: &Rat) -> String {
    let denom = r.denom();
    if denom.is_one() {
        return r.numer().to_string();
    }
    // Strip factors of 2 and 5; terminating decimal iff nothing remains.
    let mut d = denom.clone();
    let (mut twos, mut fives) = (0u32, 0u32);
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    while (&d % &two).is_zero() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let places = twos.max(fives);
    let scaled = r.numer() * BigInt::from(10).pow(places) / denom;
    let neg = scaled.is_negative();
    let digits = scaled.magnitude().to_string();
    let digits = format!("{:0>width$}", digits, width = places as usize + 1);
    let split = digits.len() - places as usize;
    let (int_part, frac_part) = digits.split_at(split);
    let frac_part = frac_part.trim_end_matches('0');
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    out.push_str(int_part);
    if !frac_part.is_empty() {
        out.push('.');
        out.push_str(frac_part);
    }
    out
}

/// Parses the polynomial text form into (coefficient, exponent) pairs,
/// unsorted and unmerged.
pub(super) fn parse_terms(text: &str) -> Result<Vec<(Rat, Rat)>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(Error::Parse("empty polynomial".into()));
    }
    // Split into signed terms at top-level + and -.
    let mut terms = Vec::new();
    let mut cur = String::new();
    let mut sign = Rat::one();
    let mut seen_any = false;
    for c in text.chars() {
        match c {
            '+' | '-' if seen_any && !cur.trim().is_empty() => {
                terms.push((sign.clone(), std::mem::take(&mut cur)));
                sign = if c == '-' { -Rat::one() } else { Rat::one() };
            }
            '+' if cur.trim().is_empty() => { /* leading plus of a term */ }
            '-' if cur.trim().is_empty() => {
                sign = -sign;
            }
            _ => {
                if !c.is_whitespace() {
                    seen_any = true;
                }
                cur.push(c);
            }
        }
    }
    if !cur.trim().is_empty() {
        terms.push((sign, cur));
    }
    if terms.is_empty() {
        return Err(Error::Parse(format!("no terms in `{text}`")));
    }
    terms.into_iter().map(|(sgn, t)| parse_term(&t).map(|(c, e)| (sgn * c, e))).collect()
}

/// Parses one unsigned term: `coef`, `x`, `x^r`, `coef*x`, `coef*x^r`,
/// `coef x^r`, or `coef*x^p/q`.
fn parse_term(t: &str) -> Result<(Rat, Rat)> {
    let t = t.trim();
    match t.find('x') {
        None => Ok((parse_decimal(t)?, Rat::zero())),
        Some(ix) => {
            let before = t[..ix].trim();
            let coef_part = match before.strip_suffix('*') {
                Some(c) if c.trim().is_empty() => {
                    return Err(Error::Parse(format!("dangling `*` in term `{t}`")));
                }
                Some(c) => c.trim(),
                None => before,
            };
            let coef = if coef_part.is_empty() { Rat::one() } else { parse_decimal(coef_part)? };
            let rest = t[ix + 1..].trim();
            let exp = if rest.is_empty() {
                Rat::one()
            } else if let Some(e) = rest.strip_prefix('^') {
                parse_decimal(e.trim())?
            } else {
                return Err(Error::Parse(format!("unexpected trailing `{rest}` in term `{t}`")));
            };
            if exp.is_negative() {
                return Err(Error::Parse(format!("negative exponent in term `{t}`")));
            }
            Ok((coef, exp))
        }
    }
}
