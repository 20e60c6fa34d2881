//! Exact discrepancy of finite point sets in `[0,1)^ℓ` for small ℓ.
//!
//! The discrepancy is the supremum over semi-open boxes `Π[aᵢ, bᵢ)` with
//! `0 ≤ aᵢ < bᵢ < 1` of `|count/N − measure|`. The supremum may be attained
//! only in the limit (an endpoint sliding onto a point coordinate from one
//! side, or `bᵢ → 1⁻`); we enumerate exactly those limit boxes in rational
//! arithmetic, so the returned value is the exact supremum.
//!
//! The two signs are handled by separate passes because they prefer
//! opposite endpoint limits. Boxes with a surplus of points want endpoints
//! closing tightly onto member coordinates (`[c, c′⁺]`); boxes with a
//! deficit want endpoints opening away from non-members
//! (`(c⁺, c′)`, or stretched to `0` / `1⁻`). Moving an endpoint between
//! consecutive critical values changes the objective linearly, so the
//! supremum is always at one of these limits.

use crate::{Error, Rat, Result};
use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Complexity guards: dimensions and point count for the exact enumerator.
pub const MAX_DIM: usize = 3;
pub const MAX_POINTS: usize = 5000;

fn rat_usize(k: usize) -> Rat {
    Rat::from_integer(BigInt::from(k))
}

/// Sorted multiset grouped into (value, multiplicity) runs.
fn group(mut vals: Vec<Rat>) -> Vec<(Rat, usize)> {
    vals.sort_unstable();
    let mut out: Vec<(Rat, usize)> = Vec::new();
    for v in vals {
        match out.last_mut() {
            Some((u, c)) if *u == v => *c += 1,
            _ => out.push((v, 1)),
        }
    }
    out
}

/// Max over tight intervals `[vᵢ, vⱼ⁺]` of `count/N − μ·(vⱼ − vᵢ)`,
/// floored at zero (the vanishing empty box).
fn excess_scan(vals: Vec<Rat>, mu: &Rat, n_total: usize) -> Rat {
    let n = rat_usize(n_total);
    let mut best = Rat::zero();
    let mut best_a: Option<Rat> = None;
    let mut before = 0usize;
    for (v, cnt) in group(vals) {
        let a_term = mu * &v - rat_usize(before) / &n;
        if best_a.as_ref().is_none_or(|prev| a_term > *prev) {
            best_a = Some(a_term);
        }
        before += cnt;
        let cand = rat_usize(before) / &n - mu * &v + best_a.as_ref().unwrap();
        if cand > best {
            best = cand;
        }
    }
    best
}

/// Max over wide intervals — `a ∈ {0} ∪ {v⁺}`, `b ∈ {v} ∪ {1⁻}` — of
/// `μ·(b − a) − count/N`, floored at zero.
fn deficit_scan(vals: Vec<Rat>, mu: &Rat, n_total: usize) -> Rat {
    let n = rat_usize(n_total);
    let total = vals.len();
    let mut best = Rat::zero();
    let mut best_a = Rat::zero(); // the a = 0 candidate
    let mut before = 0usize;
    for (v, cnt) in group(vals) {
        let cand = mu * &v - rat_usize(before) / &n + &best_a;
        if cand > best {
            best = cand;
        }
        before += cnt;
        let a_term = rat_usize(before) / &n - mu * &v;
        if a_term > best_a {
            best_a = a_term;
        }
    }
    let cand = mu - rat_usize(total) / &n + &best_a;
    if cand > best {
        best = cand;
    }
    best
}

/// Surplus pass: recursively pick a tight slab `[cᵢ, cⱼ⁺]` per dimension.
fn excess(points: &[&Vec<Rat>], dim: usize, mu: &Rat, n_total: usize, ell: usize) -> Rat {
    if dim == ell - 1 {
        return excess_scan(points.iter().map(|p| p[dim].clone()).collect(), mu, n_total);
    }
    // Group points by this coordinate.
    let mut groups: Vec<(Rat, Vec<&Vec<Rat>>)> = Vec::new();
    let mut order: Vec<&Vec<Rat>> = points.to_vec();
    order.sort_unstable_by(|a, b| a[dim].cmp(&b[dim]));
    for p in order {
        match groups.last_mut() {
            Some((v, g)) if *v == p[dim] => g.push(p),
            _ => groups.push((p[dim].clone(), vec![p])),
        }
    }
    let mut best = Rat::zero();
    for i in 0..groups.len() {
        let mut members: Vec<&Vec<Rat>> = Vec::new();
        for j in i..groups.len() {
            members.extend(groups[j].1.iter().copied());
            let mu_next = mu * (&groups[j].0 - &groups[i].0);
            let cand = excess(&members, dim + 1, &mu_next, n_total, ell);
            if cand > best {
                best = cand;
            }
        }
    }
    best
}

/// Deficit pass: recursively pick a wide slab `(a, b)` per dimension with
/// `a ∈ {0} ∪ {cᵢ⁺}` and `b ∈ {cⱼ} ∪ {1⁻}`.
fn deficit(points: &[&Vec<Rat>], dim: usize, mu: &Rat, n_total: usize, ell: usize) -> Rat {
    if dim == ell - 1 {
        return deficit_scan(points.iter().map(|p| p[dim].clone()).collect(), mu, n_total);
    }
    let mut groups: Vec<(Rat, Vec<&Vec<Rat>>)> = Vec::new();
    let mut order: Vec<&Vec<Rat>> = points.to_vec();
    order.sort_unstable_by(|a, b| a[dim].cmp(&b[dim]));
    for p in order {
        match groups.last_mut() {
            Some((v, g)) if *v == p[dim] => g.push(p),
            _ => groups.push((p[dim].clone(), vec![p])),
        }
    }
    // a-candidates: (value, first group strictly inside).
    let mut a_cands: Vec<(Rat, usize)> = vec![(Rat::zero(), 0)];
    for (gi, (v, _)) in groups.iter().enumerate() {
        a_cands.push((v.clone(), gi + 1));
    }
    // b-candidates: (value, one past the last group strictly inside).
    let mut b_cands: Vec<(Rat, usize)> = Vec::new();
    for (gi, (v, _)) in groups.iter().enumerate() {
        b_cands.push((v.clone(), gi));
    }
    b_cands.push((Rat::one(), groups.len()));
    let mut best = Rat::zero();
    for (a_val, start) in &a_cands {
        for (b_val, end) in &b_cands {
            if a_val >= b_val || start > end {
                continue;
            }
            let members: Vec<&Vec<Rat>> =
                groups[*start..*end].iter().flat_map(|(_, g)| g.iter().copied()).collect();
            let mu_next = mu * (b_val - a_val);
            let cand = deficit(&members, dim + 1, &mu_next, n_total, ell);
            if cand > best {
                best = cand;
            }
        }
    }
    best
}

/// Exact supremum of `|count/N − λ(B)|` over semi-open boxes
/// `B = Π[aᵢ, bᵢ)` with `0 ≤ aᵢ < bᵢ < 1`.
///
/// Exponential in the dimension: intended for ℓ ≤ 3 and modest N (the hard
/// guard admits N ≤ 5000, which is practical for ℓ = 1; keep N small for
/// ℓ = 2, 3).
pub fn discrepancy_exact(points: &[Vec<Rat>]) -> Result<Rat> {
    let n = points.len();
    if n == 0 || n > MAX_POINTS {
        return Err(Error::Invalid(format!("need 1 ≤ N ≤ {MAX_POINTS}, got {n}")));
    }
    let ell = points[0].len();
    if ell == 0 || ell > MAX_DIM {
        return Err(Error::Invalid(format!("need 1 ≤ ℓ ≤ {MAX_DIM}, got {ell}")));
    }
    for p in points {
        if p.len() != ell {
            return Err(Error::Invalid("inconsistent point dimensions".into()));
        }
        for c in p {
            if c < &Rat::zero() || c >= &Rat::one() {
                return Err(Error::Invalid(format!("coordinate {c} outside [0, 1)")));
            }
        }
    }
    let views: Vec<&Vec<Rat>> = points.iter().collect();
    let one = Rat::one();
    let e = excess(&views, 0, &one, n, ell);
    let d = deficit(&views, 0, &one, n, ell);
    Ok(if e >= d { e } else { d })
}
