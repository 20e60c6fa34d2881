//! Command-line driver for the laboratory: prime counting, tuple
//! construction, discrepancy and exponential-sum measurements, hypothesis
//! checks, and the consecutive-prime-string experiment pipeline.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;

use bohrlab::equidist::{
    decay_slope, discrepancy_exact, etk_bracket, exp_sum, frac_vector, ComplexBall, RangeFilter,
    SemiOpenBox,
};
use bohrlab::hypcheck::{
    classic_bv_sum, h1_ratio, h2_bv_sum, h3_prime_bv_sum, h4_concentration, BvMode, HypReport,
};
use bohrlab::lab::{self, ExperimentConfig, ReportFormat};
use bohrlab::realexp::{parse_decimal, RealExpPoly};
use bohrlab::tuples::{build_admissible, check_admissible, ShiftedTuple};
use bohrlab::{rat_to_f64, Error, Precision, Rat, Result};

#[derive(Parser)]
#[command(
    name = "bohrlab",
    about = "Experiments on consecutive primes in fractional-part Bohr sets",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Count or list primes, optionally restricted to a progression.
    Primes(PrimesArgs),
    /// Build an admissible shifted tuple and its elimination relations.
    Tuple(TupleArgs),
    /// Measure equidistribution: exact discrepancy or the
    /// Erdős–Turán–Koksma bracket.
    Discrepancy(DiscArgs),
    /// Certified exponential sums over dyadic blocks (CSV: N,value,radius).
    Expsum(ExpsumArgs),
    /// Distribution-hypothesis checks (h1–h4) and the classical
    /// Bombieri–Vinogradov error sum.
    Hyp(HypArgs),
    /// Run a full string-finding experiment from a JSON config.
    FindStrings(FindStringsArgs),
}

#[derive(Args)]
struct PrimesArgs {
    #[arg(long)]
    lo: u64,
    #[arg(long)]
    hi: u64,
    /// Print each prime on its own line instead of the count.
    #[arg(long, conflicts_with = "count")]
    list: bool,
    /// Print the count (the default).
    #[arg(long)]
    count: bool,
    /// Restrict to the progression a mod q, given as "a,q".
    #[arg(long, value_name = "A,Q")]
    ap: Option<String>,
    /// Emit a JSON summary instead of plain text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct TupleArgs {
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    d: usize,
    /// Re-run the covering-residue admissibility check and print witnesses.
    #[arg(long)]
    check_admissible: bool,
    /// Emit the tuple as JSON {ell, d, h, B, q_scale}.
    #[arg(long)]
    json: bool,
    /// Write output to a file instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DiscArgs {
    /// Polynomial text, e.g. "x^0.5" or "0.25*x^1.5+3*x^0.4".
    #[arg(long)]
    poly: String,
    /// Comma-separated integer shifts (default "0"); the point dimension.
    #[arg(long, default_value = "0")]
    shifts: String,
    /// Point range "lo..hi" (for --etk the block must be dyadic: hi = 2·lo).
    #[arg(long, value_name = "LO..HI")]
    range: String,
    /// Exact discrepancy of the certified sample (≤ 5000 points, dim ≤ 3).
    #[arg(long, conflicts_with = "etk")]
    exact: bool,
    /// Erdős–Turán–Koksma bracket from certified exponential sums.
    #[arg(long)]
    etk: bool,
    /// Frequency cutoff for --etk.
    #[arg(long = "H", value_name = "H")]
    big_h: Option<u32>,
}

#[derive(Args)]
struct ExpsumArgs {
    #[arg(long)]
    poly: String,
    /// Comma-separated integer shifts (default "0").
    #[arg(long, default_value = "0")]
    shifts: String,
    /// Frequency vector, one integer per shift, e.g. "1" or "2,-1".
    #[arg(long)]
    m: String,
    /// Coefficients of the integer-polynomial phase P(n) = Σ cₖ·nᵏ,
    /// ascending from degree 0, e.g. "0,0.5" for n/2.
    #[arg(long = "P", value_name = "C0,C1,...", default_value = "0")]
    p_coeffs: String,
    /// Subset of the block: all | ap:c,q | primes | primes-ap:a,q.
    #[arg(long, default_value = "all")]
    filter: String,
    /// Dyadic exponent range "klo..khi": one row per block [2^k, 2^{k+1}).
    #[arg(long, value_name = "KLO..KHI")]
    dyadic: String,
    /// Also print the fitted log-log decay slope to stderr.
    #[arg(long)]
    slope: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    H1,
    H2,
    H3,
    H4,
    Bv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BvModeArg {
    Pi,
    Psi,
}

#[derive(Args)]
struct HypArgs {
    /// Which check to run.
    #[arg(long, value_enum)]
    which: Which,
    /// Block start: the check runs over [N, 2N).
    #[arg(long = "N", value_name = "N")]
    n: u64,
    /// Polynomial text (h1–h4).
    #[arg(long)]
    poly: Option<String>,
    /// Tuple JSON produced by `bohrlab tuple --json` (h1–h4).
    #[arg(long, value_name = "FILE")]
    tuple_file: Option<PathBuf>,
    /// Box "u,v" per dimension, ';'-separated, e.g. "0,0.5;0.25,0.75"
    /// (h1–h4; defaults to the unit box).
    #[arg(long = "box", value_name = "U,V;U,V")]
    bx: Option<String>,
    /// Modulus-cutoff exponent (h2–h4 and bv).
    #[arg(long, default_value_t = 0.3)]
    theta: f64,
    /// Prime-forming shift for h3: counts n with n + shift prime.
    #[arg(long, default_value_t = 0)]
    shift: u64,
    /// Counting mode for bv: prime counts (pi) or log-weighted (psi).
    #[arg(long, value_enum, default_value_t = BvModeArg::Pi)]
    bv_mode: BvModeArg,
    /// Log power D in the bv envelope N/(log N)^D.
    #[arg(long, default_value_t = 2)]
    log_power: u32,
    /// Target enclosure radius for certified evaluations.
    #[arg(long, default_value_t = 2.0f64.powi(-40))]
    target_radius: f64,
    /// Emit the full report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FindStringsArgs {
    /// JSON experiment configuration.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Write the JSON report here (overrides the config's report_json).
    #[arg(long, value_name = "FILE")]
    json_out: Option<PathBuf>,
    /// Write CSV tables with this path prefix (overrides the config).
    #[arg(long, value_name = "PREFIX")]
    csv_prefix: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// Small parsers

fn parse_u64_list(s: &str) -> Result<Vec<u64>> {
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|e| Error::Parse(format!("`{t}`: {e}"))))
        .collect()
}

fn parse_i64_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .map(|t| t.trim().parse::<i64>().map_err(|e| Error::Parse(format!("`{t}`: {e}"))))
        .collect()
}

fn parse_rat_list(s: &str) -> Result<Vec<Rat>> {
    s.split(',').map(|t| parse_decimal(t.trim())).collect()
}

fn parse_range(s: &str) -> Result<(u64, u64)> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| Error::Parse(format!("range `{s}` must look like LO..HI")))?;
    let lo = a.trim().parse().map_err(|e| Error::Parse(format!("`{a}`: {e}")))?;
    let hi = b.trim().parse().map_err(|e| Error::Parse(format!("`{b}`: {e}")))?;
    Ok((lo, hi))
}

fn parse_box(s: &str) -> Result<SemiOpenBox> {
    let bounds = s
        .split(';')
        .map(|pair| {
            let (u, v) = pair
                .split_once(',')
                .ok_or_else(|| Error::Parse(format!("box side `{pair}` must look like U,V")))?;
            Ok((parse_decimal(u.trim())?, parse_decimal(v.trim())?))
        })
        .collect::<Result<Vec<_>>>()?;
    SemiOpenBox::new(bounds)
}

fn shifts_to_biguint(shifts: &[u64]) -> Vec<BigUint> {
    shifts.iter().map(|&h| BigUint::from(h)).collect()
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Subcommand bodies

fn run_primes(a: &PrimesArgs) -> Result<()> {
    let ap = match &a.ap {
        Some(s) => {
            let parts = parse_u64_list(s)?;
            if parts.len() != 2 {
                return Err(Error::Parse("--ap expects \"a,q\"".into()));
            }
            Some((parts[0], parts[1]))
        }
        None => None,
    };
    let range = bohrlab::primes::primes_in(a.lo, a.hi)?;
    let selected: Vec<u64> = match ap {
        Some((r, q)) => {
            if q == 0 {
                return Err(Error::Parse("--ap modulus must be ≥ 1".into()));
            }
            range.primes.into_iter().filter(|p| p % q == r % q).collect()
        }
        None => range.primes,
    };
    if a.json {
        let ap_text = a.ap.clone().unwrap_or_default();
        println!(
            "{{\"lo\":{},\"hi\":{},\"ap\":\"{}\",\"count\":{}}}",
            a.lo,
            a.hi,
            ap_text,
            selected.len()
        );
    } else if a.list {
        for p in &selected {
            println!("{p}");
        }
    } else {
        println!("{}", selected.len());
    }
    Ok(())
}

fn run_tuple(a: &TupleArgs) -> Result<()> {
    let tuple = build_admissible(a.ell, a.d)?;
    let mut text = String::new();
    if a.json {
        text = serde_json::to_string_pretty(&tuple)?;
        text.push('\n');
    } else {
        text.push_str(&format!("ell = {}, d = {}\n", tuple.ell(), tuple.d()));
        let hs: Vec<String> = tuple.shifts().iter().map(|h| h.to_string()).collect();
        text.push_str(&format!("h = [{}]\n", hs.join(", ")));
        text.push_str(&format!("q_scale = {}\n", tuple.q_scale()));
        for (i, row) in tuple.rows().iter().enumerate() {
            let r: Vec<String> = row.iter().map(|b| b.to_string()).collect();
            text.push_str(&format!("b[{}] = [{}]\n", i + tuple.ell() + 1, r.join(", ")));
        }
    }
    if a.check_admissible {
        let rep = check_admissible(tuple.shifts());
        let mut check = String::new();
        if rep.admissible {
            check.push_str("admissible: yes\n");
            for (p, n) in &rep.witnesses {
                check.push_str(&format!("  p = {p}: witness residue {n}\n"));
            }
        } else {
            let p = rep.covering_prime.expect("inadmissible tuples name a covering prime");
            check.push_str(&format!("admissible: no (residues cover Z/{p})\n"));
        }
        // Keep stdout (and --out files) machine-readable in JSON mode.
        if a.json {
            eprint!("{check}");
        } else {
            text.push_str(&check);
        }
    }
    write_or_print(&a.out, &text)
}

fn run_discrepancy(a: &DiscArgs) -> Result<()> {
    let poly = RealExpPoly::parse(&a.poly)?;
    let shifts = shifts_to_biguint(&parse_u64_list(&a.shifts)?);
    let (lo, hi) = parse_range(&a.range)?;
    if lo < 1 || lo >= hi {
        return Err(Error::Parse(format!("empty or invalid range {lo}..{hi}")));
    }
    let prec = Precision::default();
    let radius = 2.0f64.powi(-40);
    if a.etk {
        let h = a.big_h.ok_or_else(|| Error::Parse("--etk requires --H".into()))?;
        if hi != 2 * lo {
            return Err(Error::Parse(format!(
                "--etk sums over one dyadic block; range {lo}..{hi} must satisfy hi = 2·lo"
            )));
        }
        let ell = shifts.len();
        let mut spectra: BTreeMap<Vec<i64>, ComplexBall> = BTreeMap::new();
        let mut m = vec![-(h as i64); ell];
        loop {
            // Conjugate symmetry: compute only m whose first nonzero entry
            // is positive; the bracket fills in the mirror image.
            let first_nonzero = m.iter().find(|&&v| v != 0).copied();
            if first_nonzero.is_some_and(|v| v > 0) {
                let s = exp_sum(&poly, &shifts, &m, &[], &RangeFilter::all(), lo, radius, prec)?;
                spectra.insert(m.clone(), s);
            }
            let mut k = 0;
            loop {
                if k == ell {
                    let n_points = hi - lo;
                    let bound = etk_bracket(&spectra, n_points, h)?;
                    println!("n_lo,n_hi,H,bound");
                    println!("{lo},{hi},{h},{bound}");
                    return Ok(());
                }
                if m[k] < h as i64 {
                    m[k] += 1;
                    break;
                }
                m[k] = -(h as i64);
                k += 1;
            }
        }
    }
    // Exact mode (the default): certified sample midpoints through the
    // exact discrepancy routine.
    let pts = (lo..hi)
        .map(|n| {
            let v = frac_vector(&poly, &shifts, n, radius, prec)?;
            Ok(v.coords()
                .iter()
                .map(|c| {
                    let mid = c.mid().to_rat();
                    &mid - mid.floor()
                })
                .collect::<Vec<Rat>>())
        })
        .collect::<Result<Vec<_>>>()?;
    let d = discrepancy_exact(&pts)?;
    println!("n_lo,n_hi,points,discrepancy");
    println!("{},{},{},{}", lo, hi, pts.len(), rat_to_f64(&d));
    Ok(())
}

fn run_expsum(a: &ExpsumArgs) -> Result<()> {
    let poly = RealExpPoly::parse(&a.poly)?;
    let shifts = shifts_to_biguint(&parse_u64_list(&a.shifts)?);
    let m = parse_i64_list(&a.m)?;
    let p_coeffs = parse_rat_list(&a.p_coeffs)?;
    let filter = RangeFilter::parse(&a.filter)?;
    let (klo, khi) = parse_range(&a.dyadic)?;
    if klo > khi || khi >= 63 {
        return Err(Error::Parse(format!("dyadic exponents {klo}..{khi} out of range")));
    }
    let prec = Precision::default();
    let radius = 2.0f64.powi(-40);
    println!("N,value,radius");
    let mut series = Vec::new();
    for k in klo..=khi {
        let n = 1u64 << k;
        let s = exp_sum(&poly, &shifts, &m, &p_coeffs, &filter, n, radius, prec)?;
        println!("{},{},{}", n, s.magnitude(), s.rad);
        series.push((n, s.magnitude()));
    }
    if a.slope {
        eprintln!("slope = {}", decay_slope(&series)?);
    }
    Ok(())
}

fn load_tuple(path: &Option<PathBuf>) -> Result<ShiftedTuple> {
    let path = path
        .as_ref()
        .ok_or_else(|| Error::Parse("this check needs --tuple-file (see `tuple --json`)".into()))?;
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn need_poly(a: &HypArgs) -> Result<RealExpPoly> {
    let text =
        a.poly.as_ref().ok_or_else(|| Error::Parse("this check needs --poly".into()))?;
    RealExpPoly::parse(text)
}

fn run_hyp(a: &HypArgs) -> Result<()> {
    let prec = Precision::default();
    let report: HypReport = match a.which {
        Which::Bv => {
            let mode = match a.bv_mode {
                BvModeArg::Pi => BvMode::Pi,
                BvModeArg::Psi => BvMode::Psi,
            };
            classic_bv_sum(a.n, a.theta, mode, a.log_power)?
        }
        _ => {
            let poly = need_poly(a)?;
            let tuple = load_tuple(&a.tuple_file)?;
            let bx = match &a.bx {
                Some(s) => parse_box(s)?,
                None => SemiOpenBox::unit(tuple.ell())?,
            };
            match a.which {
                Which::H1 => h1_ratio(&poly, &tuple, &bx, a.n, a.target_radius, prec)?,
                Which::H2 => {
                    h2_bv_sum(&poly, &tuple, &bx, a.n, a.theta, a.target_radius, prec)?
                }
                Which::H3 => h3_prime_bv_sum(
                    &poly,
                    &tuple,
                    &bx,
                    a.shift,
                    a.n,
                    a.theta,
                    a.target_radius,
                    prec,
                )?,
                Which::H4 => {
                    h4_concentration(&poly, &tuple, &bx, a.n, a.theta, a.target_radius, prec)?
                }
                Which::Bv => unreachable!(),
            }
        }
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        let theta = report.theta.map(|t| t.to_string()).unwrap_or_else(|| "-".into());
        println!(
            "{:?}: N={} theta={} lhs={} normalizer={} ratio={} unknown={}",
            report.hypothesis,
            report.n,
            theta,
            report.lhs,
            report.normalizer,
            report.ratio,
            report.unknown
        );
        for w in report.worst.iter().take(5) {
            println!("  q={} residue={} deviation={}", w.q, w.residue, w.deviation);
        }
    }
    Ok(())
}

/// Runs the experiment; `Ok(true)` means the unknown-point budget was blown.
fn run_find_strings(a: &FindStringsArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&a.config)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)?;
    let report = lab::find_strings(&cfg)?;
    eprintln!(
        "scanned {} points in {:.2}s: b_hits={} prime_hits={} strings={} unknown={}",
        report.counts.points_scanned,
        report.elapsed_seconds,
        report.counts.b_hits,
        report.counts.prime_hits,
        report.strings.len(),
        report.counts.unknown_points
    );
    let json_out = a
        .json_out
        .clone()
        .or_else(|| report.config.report_json.as_ref().map(PathBuf::from));
    match &json_out {
        Some(p) => lab::emit_report(&report, ReportFormat::Json, p)?,
        None => print!("{}", lab::report_to_json(&report)?),
    }
    let csv_prefix = a
        .csv_prefix
        .clone()
        .or_else(|| report.config.report_csv_prefix.as_ref().map(PathBuf::from));
    if let Some(p) = &csv_prefix {
        lab::emit_report(&report, ReportFormat::Csv, p)?;
    }
    Ok(report.unknown_budget_exceeded())
}

fn main() -> ExitCode {
    // Die quietly when a pipe closes early (`bohrlab primes --list | head`)
    // instead of panicking on the failed write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Primes(a) => run_primes(a).map(|()| ExitCode::SUCCESS),
        Command::Tuple(a) => run_tuple(a).map(|()| ExitCode::SUCCESS),
        Command::Discrepancy(a) => run_discrepancy(a).map(|()| ExitCode::SUCCESS),
        Command::Expsum(a) => run_expsum(a).map(|()| ExitCode::SUCCESS),
        Command::Hyp(a) => run_hyp(a).map(|()| ExitCode::SUCCESS),
        Command::FindStrings(a) => run_find_strings(a).map(|over_budget| {
            if over_budget {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
