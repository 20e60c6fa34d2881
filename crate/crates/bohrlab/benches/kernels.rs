//! Throughput benchmarks for the scan kernels, labeled by backend so that
//! `cargo bench` (rayon) and `cargo bench --no-default-features`
//! (sequential) produce directly comparable reports.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_bigint::BigUint;
use num_traits::Zero;

use bohrlab::equidist::{exp_sum, RangeFilter, SemiOpenBox};
use bohrlab::hypcheck::count_b;
use bohrlab::lab::{self, ExperimentConfig};
use bohrlab::realexp::RealExpPoly;
use bohrlab::tuples::build_admissible;
use bohrlab::{Precision, Rat};

fn backend() -> &'static str {
    if cfg!(feature = "parallel") {
        "rayon"
    } else {
        "sequential"
    }
}

/// Certified box-membership scan over a dyadic block: the kernel behind
/// both the hypothesis meters and the window search.
fn bench_membership_scan(c: &mut Criterion) {
    let poly = RealExpPoly::parse("x^0.5").unwrap();
    let tuple = build_admissible(1, 3).unwrap();
    let bx = SemiOpenBox::new(vec![(Rat::zero(), Rat::new(1.into(), 4.into()))]).unwrap();
    let radius = 2.0f64.powi(-40);
    let prec = Precision::default();
    let mut group = c.benchmark_group("membership_scan");
    group.sample_size(10);
    for n in [1u64 << 14, 1 << 16] {
        group.bench_with_input(BenchmarkId::new(backend(), n), &n, |b, &n| {
            b.iter(|| {
                let counts =
                    count_b(&poly, &tuple, &bx, &RangeFilter::all(), n, radius, prec).unwrap();
                black_box(counts)
            })
        });
    }
    group.finish();
}

/// Certified exponential sum Σ e(√n) over one dyadic block.
fn bench_exp_sum(c: &mut Criterion) {
    let poly = RealExpPoly::parse("x^0.5").unwrap();
    let shifts = [BigUint::zero()];
    let radius = 2.0f64.powi(-40);
    let prec = Precision::default();
    let mut group = c.benchmark_group("exp_sum");
    group.sample_size(10);
    for n in [1u64 << 13, 1 << 15] {
        group.bench_with_input(BenchmarkId::new(backend(), n), &n, |b, &n| {
            b.iter(|| {
                let s = exp_sum(&poly, &shifts, &[1], &[], &RangeFilter::all(), n, radius, prec)
                    .unwrap();
                black_box(s.magnitude())
            })
        });
    }
    group.finish();
}

/// End-to-end string experiment on a small range (window and direct scans,
/// re-verification, diagnostics).
fn bench_experiment(c: &mut Criterion) {
    let cfg = ExperimentConfig::new("x^0.5", &[("0.9", "1"), ("0", "0.1")], 2, 1_000, 11_000);
    let mut group = c.benchmark_group("find_strings");
    group.sample_size(10);
    group.bench_function(BenchmarkId::new(backend(), "sqrt_pairs_10k"), |b| {
        b.iter(|| {
            let report = lab::find_strings(&cfg).unwrap();
            black_box(report.strings.len())
        })
    });
    group.finish();
}

criterion_group!(kernels, bench_membership_scan, bench_exp_sum, bench_experiment);
criterion_main!(kernels);
