//! A laboratory for experiments on fractional parts of polynomials with real
//! exponents and on strings of consecutive primes landing in prescribed
//! fractional-part target sets.
//!
//! The crate is organised around a rigorous-arithmetic kernel ([`rigor`]) that
//! evaluates sums of terms `d * n^rho` with certified error bounds, and five
//! layers built on top of it:
//!
//! * [`realexp`] — polynomials with real (possibly non-integer) exponents,
//!   their Taylor combinations, and analytic bounds;
//! * [`primes`] — a segmented wheel sieve plus arithmetic-progression and
//!   Chebyshev-function utilities;
//! * [`tuples`] — admissible shifted tuples with exact rational elimination
//!   relations;
//! * [`equidist`] — discrepancy, Erdős–Turán–Koksma brackets, and rigorous
//!   exponential sums;
//! * [`hypcheck`] — empirical checkers for the Maynard-type hypotheses and a
//!   classic Bombieri–Vinogradov sum;
//! * [`lab`] — experiment configs, the consecutive-prime-string search
//!   pipeline, and deterministic report emission.
//!
//! Everything that feeds a mathematical verdict goes through interval
//! (midpoint–radius) arithmetic; floating point appears only in diagnostics
//! and in quantities that are themselves empirical (ratios, slopes).

// Float validation guards are written `!(x > 0.0)` on purpose: the negated
// form rejects NaN, where `x <= 0.0` would wave it through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod accum;
pub mod equidist;
pub mod hypcheck;
pub mod lab;
mod par;
pub mod primes;
pub mod realexp;
pub mod rigor;
pub mod tuples;

use num_rational::BigRational;

/// Exact rational scalar used throughout the crate.
pub type Rat = BigRational;

/// Best-effort `f64` approximation of a rational, safe for numerators and
/// denominators far beyond the `f64` range (used for diagnostics only).
pub fn rat_to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    let (n, d) = (r.numer(), r.denom());
    let nb = n.bits() as i64;
    let db = d.bits() as i64;
    // Shift both parts into a comfortably representable window, preserving
    // the quotient up to rounding in the last few of 900 bits.
    let sn = (nb - 900).max(0) as u64;
    let sd = (db - 900).max(0) as u64;
    let nf = (n >> sn as usize).to_f64().unwrap_or(f64::NAN);
    let df = (d >> sd as usize).to_f64().unwrap_or(f64::NAN);
    (nf / df) * ((sn as f64) - (sd as f64)).exp2()
}

/// Errors surfaced by laboratory operations.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("precision ceiling of {ceiling} bits reached (radius still above target)")]
    PrecisionCeiling { ceiling: u32 },
    #[error("range exceeds supported ceiling: {0}")]
    RangeTooLarge(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Working-precision policy for the rigorous kernel.
///
/// Evaluation starts at `start_bits` of fixed-point precision and doubles on
/// demand until the requested radius is met or `max_bits` is exceeded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Precision {
    pub start_bits: u32,
    pub max_bits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { start_bits: 64, max_bits: 4096 }
    }
}

impl Precision {
    /// Default target radius for enclosure-producing operations: 2^-40.
    pub const DEFAULT_TARGET_BITS: u32 = 40;
}
