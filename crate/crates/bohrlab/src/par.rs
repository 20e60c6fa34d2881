//! Thin switch between rayon-backed and sequential execution.
//!
//! All parallel call sites in the crate funnel through `map_ordered`, which
//! maps a function over a slice and returns results in input order. With the
//! `parallel` feature (default) the work is distributed by rayon; without it
//! the same call degrades to a plain iterator map, so results are identical
//! bit-for-bit either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[cfg(feature = "parallel")]
pub(crate) fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> U + Sync + Send,
{
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
pub(crate) fn map_ordered<T, U, F>(items: &[T], f: F) -> Vec<U>
where
    F: Fn(&T) -> U,
{
    items.iter().map(f).collect()
}

/// Splits `[lo, hi)` into chunks of at most `chunk` elements, in order.
pub(crate) fn chunk_ranges(lo: u64, hi: u64, chunk: u64) -> Vec<(u64, u64)> {
    assert!(chunk > 0);
    let mut out = Vec::new();
    let mut a = lo;
    while a < hi {
        let b = hi.min(a.saturating_add(chunk));
        out.push((a, b));
        a = b;
    }
    out
}
