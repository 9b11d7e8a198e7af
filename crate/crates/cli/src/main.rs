//! `muntz`: build and check Muntz-space certificates from the command line.
//!
//! Exit codes: 0 verified, 1 falsified, 2 resource or precision limit reached,
//! 64 usage error (bad flags, malformed sequence spec or input file).

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use muntz_core::c0::{self, BUILD_CHECK_GRID};
use muntz_core::octa::{self, SliceSpec};
use muntz_core::poly::DEFAULT_TOL;
use muntz_core::spikes::{persistent_below, weak_null_trace};
use muntz_core::{
    Atom, C0Certificate, DiscreteFunctional, ExponentSequence, MuntzError, MuntzPolynomial, PointT, SequenceSpec,
    SpikeFunction,
};
use serde::Serialize;

const EXIT_VERIFIED: u8 = 0;
const EXIT_FALSIFIED: u8 = 1;
const EXIT_LIMIT: u8 = 2;
const EXIT_USAGE: u8 = 64;

const CSV_SAMPLES: usize = 256;

#[derive(Parser, Debug)]
#[command(name = "muntz", version, about = "Spike functions, c0 copies and diameter-2 certificates in Muntz spaces")]
struct Cli {
    /// Print JSON results only, no tables.
    #[arg(long, global = true)]
    json_only: bool,

    /// Omit the `generated_at` timestamp so repeated runs are byte-identical.
    #[arg(long, global = true)]
    canonical: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Table of consecutive spikes `x^lambda_k - x^lambda_{k+1}`.
    Spikes {
        #[arg(long, default_value = "geometric:2")]
        lambda: SequenceSpec,
        #[arg(long, default_value_t = 5)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Samples `(x, t, p_k(x))` of each spike.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build an almost isometric copy of c0 and write its certificate.
    C0 {
        #[arg(long, default_value = "geometric:2")]
        lambda: SequenceSpec,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        /// Samples per interval and per gap for the post-build check.
        #[arg(long, default_value_t = BUILD_CHECK_GRID)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Re-check a c0 certificate.
    VerifyC0 {
        cert: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Write the verification report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Diameter-2 certificate for a convex combination of slices.
    Octa {
        /// JSON array of `{functional, epsilon, witness}`.
        #[arg(long)]
        slices: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        weights: Vec<f64>,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, default_value = "geometric:2")]
        lambda: SequenceSpec,
        #[arg(long, default_value_t = 64)]
        kmax: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Samples `(x, t, u(x))` of the two convex combinations.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Trace `|mu(p_k / ||p_k||)|` for a discrete functional.
    Weaknull {
        #[arg(long, default_value = "geometric:2")]
        lambda: SequenceSpec,
        /// Atoms as `x:weight` pairs, e.g. `0.3:0.5,0.9:0.5`.
        #[arg(long, value_delimiter = ',', required = true)]
        atoms: Vec<String>,
        #[arg(long, default_value_t = 30)]
        kmax: usize,
        #[arg(long, default_value_t = 0.01)]
        threshold: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Limit(String),
    Falsified(String),
}

impl From<MuntzError> for Failure {
    fn from(e: MuntzError) -> Self {
        match e {
            MuntzError::InsufficientSequence { .. }
            | MuntzError::KNotFound { .. }
            | MuntzError::NumericalInconsistency { .. }
            | MuntzError::Tolerance { .. } => Failure::Limit(e.to_string()),
            MuntzError::ConstructionFailure { .. } => Failure::Falsified(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

type Outcome = Result<u8, Failure>;

struct Output {
    json_only: bool,
    canonical: bool,
}

impl Output {
    fn json<T: Serialize>(&self, value: &T) -> Result<String, Failure> {
        let mut v = serde_json::to_value(value).map_err(|e| Failure::Limit(e.to_string()))?;
        if !self.canonical {
            if let Some(obj) = v.as_object_mut() {
                let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
                obj.insert("generated_at".into(), secs.into());
            }
        }
        let mut s = serde_json::to_string_pretty(&v).map_err(|e| Failure::Limit(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    /// Writes `value` to `out`, or to stdout in JSON-only mode when no path is given.
    fn emit<T: Serialize>(&self, value: &T, out: Option<&Path>) -> Result<(), Failure> {
        let text = self.json(value)?;
        match out {
            Some(path) => write_file(path, &text),
            None if self.json_only => {
                print!("{text}");
                Ok(())
            }
            None => Ok(()),
        }
    }

    fn table(&self, text: &str) {
        if !self.json_only {
            print!("{text}");
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Limit(format!("cannot write {}: {e}", path.display())))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("malformed {}: {e}", path.display())))
}

fn build_sequence(spec: &SequenceSpec) -> Result<ExponentSequence, Failure> {
    Ok(spec.build()?)
}

/// Geometric samples of `f` in `t` over `[center / 1e3, center * 1e3]`.
fn csv_rows(out: &mut String, label: &str, center: PointT, f: impl Fn(PointT) -> f64) {
    let (lo, hi) = (center.t() * 1e-3, center.t() * 1e3);
    let ratio = (hi / lo).ln() / (CSV_SAMPLES - 1) as f64;
    for i in 0..CSV_SAMPLES {
        let p = PointT::new(lo * (ratio * i as f64).exp()).expect("positive t");
        let _ = writeln!(out, "{label},{},{},{}", p.x(), p.t(), f(p));
    }
}

fn write_csv(path: &Path, rows: impl IntoIterator<Item = (String, PointT, MuntzPolynomial)>) -> Result<(), Failure> {
    let mut out = String::from("function,x,t,value\n");
    for (label, center, poly) in rows {
        csv_rows(&mut out, &label, center, |p| poly.eval(p));
    }
    write_file(path, &out)
}

#[derive(Serialize)]
struct SpikeRow {
    k: usize,
    lambda_k: f64,
    lambda_next: f64,
    argmax: PointT,
    norm: f64,
    y: f64,
}

fn run_spikes(o: &Output, lambda: &SequenceSpec, count: usize, out: Option<&Path>, csv: Option<&Path>) -> Outcome {
    let seq = build_sequence(lambda)?;
    let mut rows = Vec::with_capacity(count);
    let mut spikes = Vec::with_capacity(count);
    for k in 1..=count {
        let spike = SpikeFunction::consecutive(&seq, k)?;
        let p = spike.profile()?;
        rows.push(SpikeRow {
            k,
            lambda_k: p.alpha,
            lambda_next: p.beta,
            argmax: p.argmax,
            norm: p.norm,
            y: p.y_lower_bound,
        });
        spikes.push((format!("p_{k}"), p.argmax, spike.to_poly()));
    }
    let mut t =
        format!("{:>4} {:>14} {:>14} {:>22} {:>20} {:>20}\n", "k", "lambda_k", "lambda_k+1", "argmax x", "norm", "y_k");
    for r in &rows {
        let _ = writeln!(
            t,
            "{:>4} {:>14.6e} {:>14.6e} {:>22.17} {:>20.17} {:>20.17}",
            r.k,
            r.lambda_k,
            r.lambda_next,
            r.argmax.x(),
            r.norm,
            r.y
        );
    }
    o.table(&t);
    o.emit(&rows, out)?;
    if let Some(path) = csv {
        write_csv(path, spikes)?;
    }
    Ok(EXIT_VERIFIED)
}

fn run_c0(
    o: &Output,
    lambda: &SequenceSpec,
    n: usize,
    tol: f64,
    grid: usize,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Outcome {
    let seq = build_sequence(lambda)?;
    let cert = c0::build_with_grid(&seq, n, tol, grid)?;
    let mut t = format!("{:>3} {:>5} {:>24} {:>24} {:>12}\n", "n", "k", "t(a_n)", "t(b_n)", "min margin");
    for p in &cert.picks {
        let margin = cert.evidence.checks.iter().filter(|c| c.n == p.n).map(|c| c.margin).fold(f64::INFINITY, f64::min);
        let _ = writeln!(
            t,
            "{:>3} {:>5} {:>24.17e} {:>24.17e} {:>12.3e}",
            p.n,
            p.k,
            p.interval.a.t(),
            p.interval.b.t(),
            margin
        );
    }
    let _ = writeln!(t, "verified: {}", cert.evidence.verified);
    o.table(&t);
    o.emit(&cert, out)?;
    if let Some(path) = csv {
        write_csv(path, cert.picks.iter().map(|p| (format!("f_{}", p.n), p.peak, p.function.clone())))?;
    }
    Ok(if cert.evidence.verified { EXIT_VERIFIED } else { EXIT_FALSIFIED })
}

#[derive(Serialize)]
struct VerifyReport {
    verified: bool,
    seed: u64,
    conditions: muntz_core::ConditionsReport,
    inequalities: muntz_core::InequalityReport,
}

fn run_verify_c0(o: &Output, cert: &Path, grid: usize, trials: usize, seed: u64, out: Option<&Path>) -> Outcome {
    let cert: C0Certificate = read_json(cert)?;
    if cert.schema != c0::C0_SCHEMA {
        return Err(Failure::Usage(format!("unsupported schema {:?}, expected {:?}", cert.schema, c0::C0_SCHEMA)));
    }
    let conditions = c0::verify_conditions(&cert, grid)?;
    let inequalities = c0::verify_c0_inequalities(&cert, trials, seed)?;
    let verified = conditions.verified && inequalities.verified;

    let mut t = format!("seed: {seed}\ngrid: {grid}\ntrials: {trials}\n");
    for c in conditions.failures() {
        let _ = writeln!(t, "FAILED condition {} (n = {}): margin {:.3e}", c.condition, c.n, c.margin);
    }
    for f in &inequalities.failures {
        let _ = writeln!(t, "FAILED inequality {}: norm {}", f.label, f.norm);
    }
    let _ = writeln!(
        t,
        "norms of combinations in [{}, {}], max |  ||f_n|| - (1 - 2^-n) | = {:.3e}",
        inequalities.min_norm, inequalities.max_norm, inequalities.max_norm_deviation
    );
    let _ = writeln!(t, "verified: {verified}");
    o.table(&t);
    o.emit(&VerifyReport { verified, seed, conditions, inequalities }, out)?;
    Ok(if verified { EXIT_VERIFIED } else { EXIT_FALSIFIED })
}

#[allow(clippy::too_many_arguments)]
fn run_octa(
    o: &Output,
    slices: &Path,
    weights: &[f64],
    eps: f64,
    lambda: &SequenceSpec,
    kmax: usize,
    tol: f64,
    out: Option<&Path>,
    csv: Option<&Path>,
) -> Outcome {
    let slices: Vec<SliceSpec> = read_json(slices)?;
    let seq = build_sequence(lambda)?;
    let cert = octa::diameter_certificate(&slices, weights, eps, &seq, kmax, tol)?;
    let mut t = format!("chosen k: {}\n", cert.chosen_k);
    for (j, m) in cert.members.iter().enumerate() {
        let _ = writeln!(
            t,
            "slice {}: ||h+|| = {:.12}, ||h-|| = {:.12}, membership margins {:.6} / {:.6}, oscillation {:.3e}",
            j + 1,
            m.norm_plus,
            m.norm_minus,
            m.membership_plus,
            m.membership_minus,
            m.oscillation
        );
    }
    let _ = writeln!(t, "separation: {:.12} (target {:.12})", cert.separation, cert.separation_target);
    let _ = writeln!(t, "max scaled member norm: {:.12}", cert.max_scaled_member_norm);
    let _ = writeln!(t, "verified: {}", cert.verified);
    o.table(&t);
    o.emit(&cert, out)?;
    if let Some(path) = csv {
        write_csv(
            path,
            [
                ("u_plus".to_string(), cert.peak, cert.u_plus.clone()),
                ("u_minus".to_string(), cert.peak, cert.u_minus.clone()),
            ],
        )?;
    }
    Ok(if cert.verified { EXIT_VERIFIED } else { EXIT_FALSIFIED })
}

fn parse_atoms(specs: &[String]) -> Result<DiscreteFunctional, Failure> {
    let atoms = specs
        .iter()
        .map(|s| {
            let (x, w) = s.split_once(':').ok_or_else(|| Failure::Usage(format!("atom {s:?} is not x:weight")))?;
            let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| Failure::Usage(format!("atom {s:?}: {e}")));
            Ok(Atom { point: PointT::from_x(parse(x)?)?, weight: parse(w)? })
        })
        .collect::<Result<Vec<_>, Failure>>()?;
    Ok(DiscreteFunctional::new(atoms)?)
}

#[derive(Serialize)]
struct WeakNullReport {
    functional: DiscreteFunctional,
    threshold: f64,
    trace: Vec<f64>,
    /// First `k` from which the whole remaining trace is below the threshold.
    k: Option<usize>,
}

fn run_weaknull(
    o: &Output,
    lambda: &SequenceSpec,
    atoms: &[String],
    kmax: usize,
    threshold: f64,
    out: Option<&Path>,
) -> Outcome {
    let functional = parse_atoms(atoms)?;
    let seq = build_sequence(lambda)?;
    let trace = weak_null_trace(&seq, &functional, kmax)?;
    let k = persistent_below(&trace, threshold);
    let mut t = format!("{:>4} {:>24}\n", "k", "|mu(p_k/||p_k||)|");
    for (i, v) in trace.iter().enumerate() {
        let _ = writeln!(t, "{:>4} {:>24.17e}", i + 1, v);
    }
    match k {
        Some(k) => {
            let _ = writeln!(t, "below {threshold} from k = {k} through k = {kmax}");
        }
        None => {
            let _ = writeln!(t, "not below {threshold} at k = {kmax}");
        }
    }
    o.table(&t);
    o.emit(&WeakNullReport { functional, threshold, trace, k }, out)?;
    Ok(if k.is_some() { EXIT_VERIFIED } else { EXIT_LIMIT })
}

fn run(cli: Cli) -> Outcome {
    let o = Output { json_only: cli.json_only, canonical: cli.canonical };
    match cli.command {
        Command::Spikes { lambda, count, out, csv } => run_spikes(&o, &lambda, count, out.as_deref(), csv.as_deref()),
        Command::C0 { lambda, n, tol, grid, out, csv } => {
            run_c0(&o, &lambda, n, tol, grid, out.as_deref(), csv.as_deref())
        }
        Command::VerifyC0 { cert, grid, trials, seed, out } => {
            run_verify_c0(&o, &cert, grid, trials, seed, out.as_deref())
        }
        Command::Octa { slices, weights, eps, lambda, kmax, tol, out, csv } => {
            run_octa(&o, &slices, &weights, eps, &lambda, kmax, tol, out.as_deref(), csv.as_deref())
        }
        Command::Weaknull { lambda, atoms, kmax, threshold, out } => {
            run_weaknull(&o, &lambda, &atoms, kmax, threshold, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { EXIT_VERIFIED });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Limit(m)) => {
            eprintln!("limit reached: {m}");
            ExitCode::from(EXIT_LIMIT)
        }
        Err(Failure::Falsified(m)) => {
            eprintln!("falsified: {m}");
            ExitCode::from(EXIT_FALSIFIED)
        }
    }
}
