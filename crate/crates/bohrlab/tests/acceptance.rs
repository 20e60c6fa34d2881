//! End-to-end acceptance checks, one test per shipped guarantee.
//!
//! Each test is self-contained and uses an independent oracle where the
//! guarantee is about exact values: trial division for the sieve, exact
//! rational moment identities for tuples, and an O(n²) enumeration for the
//! discrepancy routine. The headline existence results behind this
//! laboratory are asymptotic, so the string-finding and hypothesis checks
//! assert desk-scale surrogates with explicit runtime bounds.

use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use bohrlab::equidist::{
    box_membership, decay_slope, discrepancy_exact, exp_sum, frac_vector, FilterKind, RangeFilter,
    SemiOpenBox,
};
use bohrlab::hypcheck::{classic_bv_sum, count_b, h1_ratio, BvMode};
use bohrlab::lab::{self, ExperimentConfig, ExperimentReport};
use bohrlab::primes::{is_prime, primes_in};
use bohrlab::realexp::RealExpPoly;
use bohrlab::rigor::Verdict;
use bohrlab::tuples::{build_admissible, check_admissible, relation_residual};
use bohrlab::{rat_to_f64, Precision, Rat};

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn config_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn load_config(name: &str) -> ExperimentConfig {
    let text = std::fs::read_to_string(config_path(name)).expect("shipped config readable");
    serde_json::from_str(&text).expect("shipped config parses")
}

const SHIPPED_CONFIGS: [&str; 3] =
    ["sqrt_triplets.json", "x15_pairs.json", "two_term_singletons.json"];

/// The full-scale triplet experiment, shared by the tests that need it.
fn sqrt_triplets_report() -> &'static ExperimentReport {
    static REPORT: OnceLock<ExperimentReport> = OnceLock::new();
    REPORT.get_or_init(|| {
        lab::find_strings(&load_config("sqrt_triplets.json")).expect("triplet experiment runs")
    })
}

/// Certified fractional parts `{√n}` (midpoints of radius ≤ 2⁻⁴⁰ balls).
fn sqrt_frac_points(xs: impl Iterator<Item = u64>) -> Vec<Vec<Rat>> {
    let poly = RealExpPoly::parse("x^0.5").unwrap();
    let shifts = [BigUint::zero()];
    xs.map(|x| {
        let v = frac_vector(&poly, &shifts, x, 2.0f64.powi(-40), Precision::default()).unwrap();
        let mid = v.coords()[0].mid().to_rat();
        vec![&mid - mid.floor()]
    })
    .collect()
}

#[test]
fn acceptance_01_sieve_exactness() {
    let started = Instant::now();
    let below_million = primes_in(2, 1_000_000).unwrap();
    assert_eq!(below_million.primes.len(), 78498, "π(10⁶) mismatch");

    fn trial_division(n: u64) -> bool {
        if n < 2 {
            return false;
        }
        let mut d = 2;
        while d * d <= n {
            if n.is_multiple_of(d) {
                return false;
            }
            d += 1;
        }
        true
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x01);
    for _ in 0..200 {
        let lo = rng.random_range(2..99_999u64);
        let hi = (lo + rng.random_range(1..=500u64)).min(100_000);
        let got = primes_in(lo, hi).unwrap().primes;
        let want: Vec<u64> = (lo..hi).filter(|&n| trial_division(n)).collect();
        assert_eq!(got, want, "sieve disagrees with trial division on [{lo}, {hi})");
    }
    assert!(started.elapsed() < Duration::from_secs(5), "sieve criterion overran 5 s");
}

#[test]
fn acceptance_02_tuple_exactness() {
    let started = Instant::now();
    let t = build_admissible(2, 3).unwrap();
    let h: Vec<u64> = vec![0, 6, 648];
    assert_eq!(t.shifts(), h.iter().map(|&v| BigUint::from(v)).collect::<Vec<_>>());
    assert_eq!(t.q_scale(), &BigUint::from(36u32));
    assert_eq!(t.rows().len(), 1);
    assert_eq!(t.rows()[0], vec![BigInt::from(-107), BigInt::from(108)]);

    // Exact moment identities of the elimination row: Σb = 1, Σb·hᵢ = h₃.
    let row = &t.rows()[0];
    let sum_b: BigInt = row.iter().sum();
    assert_eq!(sum_b, BigInt::one());
    let sum_bh: BigInt =
        row.iter().zip(&h).map(|(b, &hv)| b * BigInt::from(hv)).sum();
    assert_eq!(sum_bh, BigInt::from(648));

    for ell in 1..=3usize {
        for d in ell..=8usize {
            let t = build_admissible(ell, d).unwrap();
            let rep = check_admissible(t.shifts());
            assert!(rep.admissible, "tuple ({ell}, {d}) is not admissible");
            // Every elimination row must satisfy its ℓ exact moment
            // equations Σᵢ bᵢ·hᵢʲ = h_sʲ, j = 0..ℓ−1.
            for (r, row) in t.rows().iter().enumerate() {
                let h_s = BigInt::from(t.shifts()[ell + r].clone());
                for j in 0..ell as u32 {
                    let lhs: BigInt = row
                        .iter()
                        .zip(t.shifts())
                        .map(|(b, hv)| b * BigInt::from(hv.clone()).pow(j))
                        .sum();
                    assert_eq!(
                        lhs,
                        h_s.pow(j),
                        "moment {j} fails for ({ell}, {d}) row {r}"
                    );
                }
            }
        }
    }
    assert!(started.elapsed() < Duration::from_secs(1), "tuple criterion overran 1 s");
}

#[test]
fn acceptance_03_residual_decay() {
    let started = Instant::now();
    let poly = RealExpPoly::parse("x^1.5").unwrap();
    let tuple = build_admissible(2, 3).unwrap();
    // |F(x+h₃) − Σb·F(x+hᵢ)| should shrink like x^{−1/2}; the scaled series
    // |residual|·x^{1/2} must therefore stay flat across the dyadic grid.
    let mut scaled = Vec::new();
    for k in 12..=24u32 {
        let x = 1u64 << k;
        let r = relation_residual(&poly, &tuple, 3, x, 1e-9, Precision::default()).unwrap();
        scaled.push(rat_to_f64(&r.abs_upper()) * (x as f64).sqrt());
    }
    let third = scaled.len() / 3;
    let first = scaled[..third].iter().cloned().fold(0.0, f64::max);
    let last = scaled[scaled.len() - third..].iter().cloned().fold(0.0, f64::max);
    assert!(
        last <= 2.0 * first,
        "scaled residual grew: first-third max {first}, last-third max {last}"
    );
    assert!(started.elapsed() < Duration::from_secs(10), "residual criterion overran 10 s");
}

#[test]
fn acceptance_04_equidistribution() {
    // Part 1: the √n block at 2^16 is visibly equidistributed.
    let n = 1u64 << 16;
    let sample = sqrt_frac_points((0..4000).map(|i| n + (i * n) / 4000));
    let d_sparse = discrepancy_exact(&sample).unwrap();
    assert!(d_sparse <= rat(5, 100), "D = {} exceeds 0.05", rat_to_f64(&d_sparse));

    // Part 2: at matched sample sizes (1024 points), the block at 2^16
    // out-equidistributes the full block at 2^10.
    let d_low = discrepancy_exact(&sqrt_frac_points(1024..2048)).unwrap();
    let d_high = discrepancy_exact(&sqrt_frac_points(n..n + 1024)).unwrap();
    assert!(
        d_high < d_low,
        "discrepancy failed to improve: D(2^16) = {} vs D(2^10) = {}",
        rat_to_f64(&d_high),
        rat_to_f64(&d_low)
    );

    // Part 3: exact agreement with an O(n²) enumeration oracle on random
    // one-dimensional instances (duplicates and 0-values included).
    fn oracle(points: &[Rat]) -> Rat {
        let n = Rat::from_integer(BigInt::from(points.len()));
        let mut ends: Vec<Rat> = points.to_vec();
        ends.push(Rat::zero());
        ends.push(Rat::one());
        ends.sort();
        ends.dedup();
        let mut best = Rat::zero();
        let mut consider = |count: usize, measure: Rat| {
            let dev = Rat::from_integer(BigInt::from(count)) / &n - measure;
            let dev = if dev < Rat::zero() { -dev } else { dev };
            if dev > best {
                best = dev;
            }
        };
        for (i, u) in ends.iter().enumerate() {
            // Degenerate surplus box [u, u⁺).
            if *u < Rat::one() {
                consider(points.iter().filter(|x| *x == u).count(), Rat::zero());
            }
            for v in &ends[i + 1..] {
                for a_open in [false, true] {
                    for b_closed in [false, true] {
                        if b_closed && *v >= Rat::one() {
                            continue;
                        }
                        let count = points
                            .iter()
                            .filter(|x| if a_open { *x > u } else { *x >= u })
                            .filter(|x| if b_closed { *x <= v } else { *x < v })
                            .count();
                        consider(count, v - u);
                    }
                }
            }
        }
        best
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x04);
    for case in 0..100 {
        let len = rng.random_range(1..=24usize);
        let pts: Vec<Rat> = (0..len)
            .map(|_| {
                let d = rng.random_range(1..=16i64);
                rat(rng.random_range(0..d), d)
            })
            .collect();
        let as_vecs: Vec<Vec<Rat>> = pts.iter().cloned().map(|p| vec![p]).collect();
        let got = discrepancy_exact(&as_vecs).unwrap();
        let want = oracle(&pts);
        assert_eq!(got, want, "case {case}: routine {got} vs oracle {want} on {pts:?}");
    }
}

#[test]
fn acceptance_05_exponential_sum_decay() {
    let started = Instant::now();
    let poly = RealExpPoly::parse("x^0.5").unwrap();
    let shifts = [BigUint::zero()];
    let radius = 2.0f64.powi(-40);
    let prec = Precision::default();

    let all: Vec<(u64, f64)> = (10..=18u32)
        .map(|k| {
            let n = 1u64 << k;
            let s =
                exp_sum(&poly, &shifts, &[1], &[], &RangeFilter::all(), n, radius, prec).unwrap();
            (n, s.magnitude())
        })
        .collect();
    let slope_all = decay_slope(&all).unwrap();
    assert!(slope_all <= 0.9, "full-range slope {slope_all} exceeds the power-saving bound");

    let primes_only = RangeFilter::new(FilterKind::Primes).unwrap();
    let filtered: Vec<(u64, f64)> = (12..=18u32)
        .map(|k| {
            let n = 1u64 << k;
            let s = exp_sum(&poly, &shifts, &[1], &[], &primes_only, n, radius, prec).unwrap();
            (n, s.magnitude())
        })
        .collect();
    let slope_primes = decay_slope(&filtered).unwrap();
    assert!(slope_primes <= 0.9, "prime-filtered slope {slope_primes} exceeds the bound");
    assert!(started.elapsed() < Duration::from_secs(60), "sum criterion overran 60 s");
}

#[test]
fn acceptance_06_h1_density_ratio() {
    let started = Instant::now();
    let poly = RealExpPoly::parse("x^0.5").unwrap();
    let tuple = build_admissible(1, 3).unwrap();
    let bx = SemiOpenBox::new(vec![(Rat::zero(), rat(1, 2))]).unwrap();
    let radius = 2.0f64.powi(-40);
    let prec = Precision::default();

    let small = h1_ratio(&poly, &tuple, &bx, 1 << 12, radius, prec).unwrap();
    let large = h1_ratio(&poly, &tuple, &bx, 1 << 20, radius, prec).unwrap();
    assert!(
        (0.8..=1.3).contains(&large.ratio),
        "h1 ratio {} at 2^20 outside [0.8, 1.3]",
        large.ratio
    );
    assert!(
        (large.ratio - 1.0).abs() < (small.ratio - 1.0).abs(),
        "h1 ratio did not tighten: 2^12 gives {}, 2^20 gives {}",
        small.ratio,
        large.ratio
    );
    assert!(started.elapsed() < Duration::from_secs(60), "h1 criterion overran 60 s");
}

#[test]
fn acceptance_07_partition_identities() {
    let radius = 2.0f64.powi(-40);
    let prec = Precision::default();
    for name in SHIPPED_CONFIGS {
        let cfg = load_config(name);
        let (poly, _) = cfg.resolve().expect("shipped config resolves");
        let ell = poly.ell();
        let tuple = build_admissible(ell, cfg.d.unwrap_or(ell.max(cfg.m + 2))).unwrap();
        let bx = SemiOpenBox::new(vec![(Rat::zero(), rat(1, 4)); ell]).unwrap();
        let n = 1u64 << 13;

        let (total, total_unknown) =
            count_b(&poly, &tuple, &bx, &RangeFilter::all(), n, radius, prec).unwrap();
        assert!(total > 0, "{name}: count over [0,1/4)^{ell} at N = 2^13 is degenerate");

        for q in [2u64, 3, 5, 7, 30] {
            let mut sum = 0u64;
            let mut sum_unknown = 0u64;
            for c in 0..q {
                let filter = RangeFilter::new(FilterKind::Ap { c, q }).unwrap();
                let (part, unk) = count_b(&poly, &tuple, &bx, &filter, n, radius, prec).unwrap();
                sum += part;
                sum_unknown += unk;
            }
            assert_eq!(sum, total, "{name}: residue classes mod {q} fail to partition the count");
            assert_eq!(
                sum_unknown, total_unknown,
                "{name}: undecided points differ across the mod-{q} partition"
            );
        }
    }
}

#[test]
fn acceptance_08_classical_bv_meter() {
    let started = Instant::now();
    let at_1e5 = classic_bv_sum(100_000, 0.3, BvMode::Pi, 2).unwrap();
    let at_1e6 = classic_bv_sum(1_000_000, 0.3, BvMode::Pi, 2).unwrap();
    assert!(
        at_1e6.ratio < at_1e5.ratio,
        "level-of-distribution sum failed to shrink against N/(log N)²: {} → {}",
        at_1e5.ratio,
        at_1e6.ratio
    );
    assert!(started.elapsed() < Duration::from_secs(30), "meter criterion overran 30 s");
}

#[test]
fn acceptance_09_string_finding() {
    let started = Instant::now();
    let report = sqrt_triplets_report();
    assert!(!report.strings.is_empty(), "no 3-strings of consecutive primes found");
    assert!(report.strings.iter().all(|s| s.primes.len() == 3));
    assert_eq!(report.counts.reverify_dropped, 0, "a string failed its doubled-precision recheck");

    // Independent spot check of the first and last reported strings:
    // primality, global consecutiveness, and membership in the target union
    // at doubled precision.
    let cfg = load_config("sqrt_triplets.json");
    let (poly, union) = cfg.resolve().unwrap();
    let doubled = Precision { start_bits: cfg.start_bits * 2, max_bits: cfg.max_bits * 2 };
    for s in [&report.strings[0], report.strings.last().unwrap()] {
        assert!(s.primes.iter().all(|&p| is_prime(p)));
        let span = primes_in(s.primes[0], s.primes[2] + 1).unwrap().primes;
        assert_eq!(span, s.primes, "members are not globally consecutive primes");
        for &p in &s.primes {
            let v = frac_vector(
                &poly,
                &[BigUint::zero()],
                p,
                cfg.target_radius / 2.0,
                doubled,
            )
            .unwrap();
            let hits = union
                .intervals()
                .iter()
                .filter(|(u, w)| {
                    let bx = SemiOpenBox::new(vec![(u.clone(), w.clone())]).unwrap();
                    box_membership(&v, &bx).unwrap() == Verdict::In
                })
                .count();
            assert_eq!(hits, 1, "{{√{p}}} not certified inside the target union");
        }
    }
    assert!(
        started.elapsed() < Duration::from_secs(120),
        "string criterion overran 2 min (scan took {:.1}s)",
        report.elapsed_seconds
    );
}

#[test]
fn acceptance_10_rigor() {
    // Part 1: halving the target radius never flips a certified verdict.
    let pool: Vec<RealExpPoly> = [
        "x^0.5",
        "x^1.5",
        "x^0.4",
        "x^1.25",
        "2*x^0.75",
        "0.25*x^1.5 + 3*x^0.4",
        "x^0.5 + 0.125*x^0.25",
        "3*x^2.2",
    ]
    .iter()
    .map(|s| RealExpPoly::parse(s).unwrap())
    .collect();
    let shifts = [BigUint::zero()];
    let radius = 2.0f64.powi(-40);
    let prec = Precision::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x10);
    let mut decided = 0u64;
    for _ in 0..10_000 {
        let poly = &pool[rng.random_range(0..pool.len())];
        let n = rng.random_range(2..=1_000_000u64);
        let k = rng.random_range(0..8i64);
        let w = rng.random_range(1..=8 - k);
        let bx = SemiOpenBox::new(vec![(rat(k, 8), rat(k + w, 8))]).unwrap();
        let coarse = frac_vector(poly, &shifts, n, radius, prec).unwrap();
        let fine = frac_vector(poly, &shifts, n, radius / 2.0, prec).unwrap();
        let a = box_membership(&coarse, &bx).unwrap();
        let b = box_membership(&fine, &bx).unwrap();
        match (a, b) {
            (Verdict::In, Verdict::Out) | (Verdict::Out, Verdict::In) => {
                panic!("verdict flipped at n = {n} in {bx:?}")
            }
            (Verdict::Unknown, _) | (_, Verdict::Unknown) => {}
            _ => decided += 1,
        }
    }
    assert!(decided > 9_000, "too few probes produced certified verdicts: {decided}");

    // Part 2: undecided points stay within budget on every shipped config.
    let triplets = sqrt_triplets_report();
    let mut fractions = vec![(
        SHIPPED_CONFIGS[0].to_string(),
        triplets.counts.unknown_points as f64 / triplets.counts.points_scanned as f64,
    )];
    for name in &SHIPPED_CONFIGS[1..] {
        let report = lab::find_strings(&load_config(name)).expect("shipped config runs");
        fractions.push((
            name.to_string(),
            report.counts.unknown_points as f64 / report.counts.points_scanned as f64,
        ));
    }
    for (name, fraction) in fractions {
        assert!(fraction <= 1e-6, "{name}: undecided fraction {fraction} exceeds 10⁻⁶");
    }
}
