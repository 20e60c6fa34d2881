//! Compensated (Kahan–Neumaier) summation.
//!
//! Float aggregates in this crate must not depend on how work was split
//! across threads, so every parallel reduction produces per-chunk partials
//! with a fixed chunk grid and a single merger folds them in ascending chunk
//! order through this accumulator.

#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator in, preserving its compensation term.
    pub fn merge(&mut self, other: KahanSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_beats_naive_summation() {
        // 1 + 2^-60 added 2^20 times: naive f64 loses the tail entirely.
        let tiny = (-60f64).exp2();
        let mut k = KahanSum::new();
        k.add(1.0);
        let mut naive = 1.0f64;
        for _ in 0..1 << 20 {
            k.add(tiny);
            naive += tiny;
        }
        assert_eq!(naive, 1.0);
        let expect = 1.0 + (1u64 << 20) as f64 * tiny;
        assert!((k.value() - expect).abs() < 1e-18);
    }

    #[test]
    fn merge_matches_flat_accumulation() {
        let xs: Vec<f64> = (1..=1000).map(|i| 1.0 / i as f64).collect();
        let mut flat = KahanSum::new();
        for &x in &xs {
            flat.add(x);
        }
        let mut merged = KahanSum::new();
        for chunk in xs.chunks(97) {
            let mut part = KahanSum::new();
            for &x in chunk {
                part.add(x);
            }
            merged.merge(part);
        }
        assert!((flat.value() - merged.value()).abs() < 1e-14);
    }
}
