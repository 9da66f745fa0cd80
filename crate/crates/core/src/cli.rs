//! Command-line front end.
//!
//! Exit codes: 0 success, 1 computation error, 2 configuration or parse
//! error, 3 verification failure.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::approx::{approx_pmf_curve, default_alpha_grid, word_measures, WordMeasures};
use crate::guesswork::{build_rank_table, typical_set_with_table, TypicalSetSpec, DEFAULT_BUDGET};
use crate::measures::{renyi_entropy, MeasureBundle};
use crate::rate::{alpha_at, domain, rate, rate_curve, rate_derivatives, RateCurve, RateKind, RateSample, ENDPOINT_CLAMP};
use crate::report::{self, Metadata};
use crate::source::{tilted_family_sample, CategoricalSource, SequenceSource};
use crate::verify::{self, VerifyConfig};

/// Environment variable overriding the default enumeration budget.
pub const BUDGET_ENV: &str = "TILTLAB_BUDGET";

pub const EXIT_COMPUTE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_VERIFY: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "tiltlab", version, about = "Tilted sources, guesswork and large-deviation rate functions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample the tilted family of a memoryless source (CSV of simplex points).
    Tilt(TiltArgs),
    /// Information measures of a tilt against its source (JSON).
    Measures(MeasuresArgs),
    /// Exact rank table and guesswork PMF (CSV).
    Guesswork(GuessworkArgs),
    /// Tilted typical sets and the bound ledger (CSV and JSON).
    Typical(TypicalArgs),
    /// Rate function curve (CSV).
    Rate(RateArgs),
    /// Approximate guesswork PMF overlaid on the exact one (CSV).
    Approx(ApproxArgs),
    /// Run the acceptance suite (JSON report; exit 3 on any failure).
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
pub struct SourceArg {
    /// Source description (JSON).
    #[arg(long)]
    pub source: PathBuf,
}

#[derive(Debug, Args)]
pub struct BudgetArg {
    /// Largest number of strings to enumerate [default: 2^24, or TILTLAB_BUDGET].
    #[arg(long)]
    pub budget: Option<u64>,
}

#[derive(Debug, Args)]
pub struct TiltArgs {
    #[command(flatten)]
    pub source: SourceArg,
    /// Tilt orders: `a,b,c`, `lin:a:b:n`, `log:a:b:n` or `symlog:a:b:n`.
    #[arg(long, default_value = "lin:-4:4:33")]
    pub alpha_grid: String,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MeasuresArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    /// Tilt order of the measured distribution (memoryless sources).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub alpha: f64,
    #[command(flatten)]
    pub budget: BudgetArg,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GuessworkArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long)]
    pub n: usize,
    #[command(flatten)]
    pub budget: BudgetArg,
    /// Output directory for `rank_table.csv` and `pmf.csv` [default: rank table on stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TypicalArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long)]
    pub n: usize,
    #[arg(long, allow_negative_numbers = true)]
    pub alpha: f64,
    #[arg(long)]
    pub epsilon: f64,
    #[command(flatten)]
    pub budget: BudgetArg,
    /// Output directory for `sets.csv`, `bounds.csv` and `report.json` [default: bounds on stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub source: SourceArg,
    /// `g` (guesswork), `r` (reverse guesswork) or `i` (information).
    #[arg(long, default_value = "g")]
    pub kind: RateKind,
    /// Evaluation points in nats; default is a uniform interior grid.
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Size of the default interior grid.
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// Output file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ApproxArgs {
    #[command(flatten)]
    pub source: SourceArg,
    #[arg(long)]
    pub n: usize,
    /// Tilt orders of both signs [default: 61 log-spaced magnitudes in [0.01, 20] per sign].
    #[arg(long)]
    pub alpha_grid: Option<String>,
    #[command(flatten)]
    pub budget: BudgetArg,
    /// Output directory for `approx.csv` and `overlay.csv` [default: overlay on stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Fewer random sources and lengths.
    #[arg(long)]
    pub quick: bool,
    #[arg(long, default_value_t = verify::DEFAULT_SEED)]
    pub seed: u64,
    #[command(flatten)]
    pub budget: BudgetArg,
    /// Output file for the JSON report [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Compute(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Compute(_) => EXIT_COMPUTE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Compute(m) => write!(f, "computation error: {m}"),
        }
    }
}

fn config(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn compute(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

fn io_err(path: &Path) -> impl Fn(io::Error) -> CliError + '_ {
    move |e| CliError::Compute(format!("{}: {e}", path.display()))
}

/// Parses a grid: `a,b,c`, `lin:a:b:n`, `log:a:b:n` (positive ends) or
/// `symlog:a:b:n` (`n` log-spaced magnitudes in `[a, b]`, negated then positive).
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, String> {
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("invalid number {s:?} in grid {spec:?}"));
    let parts: Vec<&str> = spec.split(':').collect();
    let values = match parts.as_slice() {
        [list] => list.split(',').map(num).collect::<Result<Vec<_>, _>>()?,
        [kind, a, b, n] => {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| format!("invalid count {n:?} in grid {spec:?}"))?;
            if n < 2 {
                return Err(format!("grid {spec:?} needs at least 2 points"));
            }
            let lin = |lo: f64, hi: f64| -> Vec<f64> {
                (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
            };
            match *kind {
                "lin" => lin(a, b),
                "log" | "symlog" => {
                    if !(a > 0.0 && b > 0.0) {
                        return Err(format!("grid {spec:?} needs positive ends"));
                    }
                    let mags: Vec<f64> = lin(a.ln(), b.ln()).into_iter().map(f64::exp).collect();
                    if *kind == "log" {
                        mags
                    } else {
                        mags.iter().rev().map(|m| -m).chain(mags.iter().copied()).collect()
                    }
                }
                other => return Err(format!("unknown grid kind {other:?}")),
            }
        }
        _ => return Err(format!("cannot parse grid {spec:?}")),
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(format!("grid {spec:?} must hold finite values"));
    }
    Ok(values)
}

/// Budget from the flag, else from `TILTLAB_BUDGET`, else the default.
pub fn resolve_budget(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| CliError::Config(format!("{BUDGET_ENV}={v:?} is not a non-negative integer"))),
        Err(_) => Ok(DEFAULT_BUDGET),
    }
}

struct LoadedSource {
    source: SequenceSource,
    meta: Metadata,
}

fn load_source(path: &Path) -> Result<LoadedSource, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let source = SequenceSource::from_json_str(text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let meta = Metadata {
        source_sha256: report::source_hash(&bytes),
        source_kind: source.kind().to_string(),
        n: None,
        initial: source.initial_distribution().map(|d| d.to_string()),
        extra: Vec::new(),
    };
    Ok(LoadedSource { source, meta })
}

fn memoryless(loaded: &LoadedSource, what: &str) -> Result<CategoricalSource, CliError> {
    loaded
        .source
        .as_categorical()
        .cloned()
        .ok_or_else(|| CliError::Config(format!("{what} needs a categorical source, got {}", loaded.source.kind())))
}

fn check_n(n: usize) -> Result<(), CliError> {
    if n == 0 {
        Err(CliError::Config("--n must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// Writes to `path`, or to stdout when absent.
fn with_sink(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(io_err(parent))?;
            }
            let mut file = io::BufWriter::new(fs::File::create(p).map_err(io_err(p))?);
            f(&mut file).and_then(|_| file.flush()).map_err(io_err(p))
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            match f(&mut lock).and_then(|_| lock.flush()) {
                // A closed reader (`| head`) is not an error.
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
                r => r.map_err(|e| compute(format!("stdout: {e}"))),
            }
        }
    }
}

fn in_dir(dir: &Path, name: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    Ok(dir.join(name))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<(), CliError> {
    with_sink(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value).map_err(io::Error::other)?;
        writeln!(w)
    })
}

fn run_tilt(args: &TiltArgs) -> Result<i32, CliError> {
    let loaded = load_source(&args.source.source)?;
    let mu = memoryless(&loaded, "tilt")?;
    let alphas = parse_grid(&args.alpha_grid).map_err(CliError::Config)?;
    let family: Vec<(f64, CategoricalSource)> = alphas.iter().copied().zip(tilted_family_sample(&mu, &alphas)).collect();
    let meta = loaded.meta.clone().with("alpha_grid", &args.alpha_grid);
    with_sink(args.out.as_deref(), |w| report::write_tilt_family(w, &meta, mu.alphabet(), &family))?;
    Ok(0)
}

#[derive(Serialize)]
struct MeasuresOutput {
    source_sha256: String,
    kind: String,
    n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    measures: Option<MeasureBundle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    renyi_entropy: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    word_measures: Option<WordMeasures>,
}

fn run_measures(args: &MeasuresArgs) -> Result<i32, CliError> {
    check_n(args.n)?;
    if !args.alpha.is_finite() {
        return Err(config("--alpha must be finite"));
    }
    let loaded = load_source(&args.source.source)?;
    let out = match loaded.source.as_categorical() {
        Some(mu) => MeasuresOutput {
            source_sha256: loaded.meta.source_sha256.clone(),
            kind: loaded.meta.source_kind.clone(),
            n: args.n,
            alpha: Some(args.alpha),
            measures: Some(MeasureBundle::of_tilt(mu, args.alpha, args.n)),
            renyi_entropy: Some(renyi_entropy(mu, args.alpha, args.n)),
            word_measures: None,
        },
        None => {
            let budget = resolve_budget(args.budget.budget)?;
            MeasuresOutput {
                source_sha256: loaded.meta.source_sha256.clone(),
                kind: loaded.meta.source_kind.clone(),
                n: args.n,
                alpha: None,
                measures: None,
                renyi_entropy: None,
                word_measures: Some(word_measures(&loaded.source, args.n, budget).map_err(compute)?),
            }
        }
    };
    write_json(args.out.as_deref(), &out)?;
    Ok(0)
}

fn run_guesswork(args: &GuessworkArgs) -> Result<i32, CliError> {
    check_n(args.n)?;
    let budget = resolve_budget(args.budget.budget)?;
    let loaded = load_source(&args.source.source)?;
    let table = build_rank_table(&loaded.source, args.n, budget).map_err(compute)?;
    let meta = Metadata {
        n: Some(args.n),
        ..loaded.meta
    };
    match &args.out {
        Some(dir) => {
            with_sink(Some(&in_dir(dir, "rank_table.csv")?), |w| report::write_rank_table(w, &meta, &table))?;
            with_sink(Some(&in_dir(dir, "pmf.csv")?), |w| report::write_pmf(w, &meta, &table))?;
        }
        None => with_sink(None, |w| report::write_rank_table(w, &meta, &table))?,
    }
    Ok(0)
}

#[derive(Serialize)]
struct SetSummary {
    size: usize,
    probability: f64,
}

#[derive(Serialize)]
struct TypicalOutput<'a> {
    source_sha256: &'a str,
    spec: TypicalSetSpec,
    chebyshev_prefactor: f64,
    a: SetSummary,
    b: SetSummary,
    d: SetSummary,
    e: SetSummary,
    all_pass: bool,
    hard_failures: Vec<&'static str>,
}

fn run_typical(args: &TypicalArgs) -> Result<i32, CliError> {
    check_n(args.n)?;
    let budget = resolve_budget(args.budget.budget)?;
    let loaded = load_source(&args.source.source)?;
    let mu = memoryless(&loaded, "typical")?;
    let spec = TypicalSetSpec::new(args.alpha, args.epsilon, args.n).map_err(config)?;
    let table = build_rank_table(&loaded.source, args.n, budget).map_err(compute)?;
    let rep = typical_set_with_table(&mu, &table, spec).map_err(compute)?;
    let meta = Metadata {
        n: Some(args.n),
        ..loaded.meta.clone()
    }
    .with("alpha", args.alpha)
    .with("epsilon", args.epsilon);
    match &args.out {
        Some(dir) => {
            with_sink(Some(&in_dir(dir, "sets.csv")?), |w| report::write_sets(w, &meta, &table, &rep))?;
            with_sink(Some(&in_dir(dir, "bounds.csv")?), |w| report::write_bounds(w, &meta, &rep.bounds))?;
            let summary = |s: &crate::guesswork::MemberSet| SetSummary {
                size: s.len(),
                probability: s.probability,
            };
            let out = TypicalOutput {
                source_sha256: &loaded.meta.source_sha256,
                spec,
                chebyshev_prefactor: rep.chebyshev_prefactor,
                a: summary(&rep.a),
                b: summary(&rep.b),
                d: summary(&rep.d),
                e: summary(&rep.e),
                all_pass: rep.all_pass(),
                hard_failures: rep.hard_failures().map(|b| b.id).collect(),
            };
            write_json(Some(&in_dir(dir, "report.json")?), &out)?;
        }
        None => with_sink(None, |w| report::write_bounds(w, &meta, &rep.bounds))?,
    }
    Ok(0)
}

/// Samples at the requested points; derivatives and order are NaN where the
/// limiting value is returned.
fn rate_at_points(mu: &CategoricalSource, kind: RateKind, ts: &[f64]) -> Result<RateCurve, CliError> {
    let (lo, hi) = domain(mu, kind);
    let samples = ts
        .iter()
        .map(|&t| {
            let j = rate(mu, kind, t).map_err(compute)?;
            let interior = t > lo + ENDPOINT_CLAMP && t < hi - ENDPOINT_CLAMP;
            let (alpha, (djdt, d2jdt2)) = if interior {
                (
                    alpha_at(mu, kind, t).map_err(compute)?,
                    rate_derivatives(mu, t, kind).map_err(compute)?,
                )
            } else {
                (f64::NAN, (f64::NAN, f64::NAN))
            };
            Ok(RateSample {
                alpha,
                t,
                j,
                djdt,
                d2jdt2,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(RateCurve { kind, samples })
}

fn run_rate(args: &RateArgs) -> Result<i32, CliError> {
    let loaded = load_source(&args.source.source)?;
    let mu = memoryless(&loaded, "rate")?;
    let curve = match &args.t_grid {
        Some(spec) => rate_at_points(&mu, args.kind, &parse_grid(spec).map_err(CliError::Config)?)?,
        None => rate_curve(&mu, args.kind, args.samples).map_err(config)?,
    };
    let meta = loaded.meta.clone().with("kind", args.kind.as_str());
    with_sink(args.out.as_deref(), |w| report::write_rate_curve(w, &meta, &curve))?;
    Ok(0)
}

fn run_approx(args: &ApproxArgs) -> Result<i32, CliError> {
    check_n(args.n)?;
    let budget = resolve_budget(args.budget.budget)?;
    let loaded = load_source(&args.source.source)?;
    let alphas = match &args.alpha_grid {
        Some(spec) => parse_grid(spec).map_err(CliError::Config)?,
        None => default_alpha_grid(),
    };
    let curve = approx_pmf_curve(&loaded.source, args.n, &alphas, budget).map_err(|e| match e {
        crate::approx::ApproxError::InvalidAlpha(_) | crate::approx::ApproxError::InvalidGrid(_) => config(e),
        other => compute(other),
    })?;
    let table = build_rank_table(&loaded.source, args.n, budget).map_err(compute)?;
    let meta = Metadata {
        n: Some(args.n),
        ..loaded.meta
    };
    match &args.out {
        Some(dir) => {
            with_sink(Some(&in_dir(dir, "approx.csv")?), |w| report::write_approx_curve(w, &meta, &curve))?;
            with_sink(Some(&in_dir(dir, "overlay.csv")?), |w| report::write_overlay(w, &meta, &table, &curve))?;
        }
        None => with_sink(None, |w| report::write_overlay(w, &meta, &table, &curve))?,
    }
    Ok(0)
}

fn run_verify(args: &VerifyArgs) -> Result<i32, CliError> {
    let cfg = VerifyConfig {
        quick: args.quick,
        seed: args.seed,
        budget: resolve_budget(args.budget.budget)?,
    };
    let rep = verify::run_all(&cfg);
    for o in &rep.outcomes {
        for line in o.detail_lines() {
            eprintln!("{line}");
        }
    }
    write_json(args.out.as_deref(), &rep)?;
    Ok(if rep.passed { 0 } else { EXIT_VERIFY })
}

pub fn run(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Tilt(a) => run_tilt(a),
        Command::Measures(a) => run_measures(a),
        Command::Guesswork(a) => run_guesswork(a),
        Command::Typical(a) => run_typical(a),
        Command::Rate(a) => run_rate(a),
        Command::Approx(a) => run_approx(a),
        Command::Verify(a) => run_verify(a),
    }
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tiltlab: {e}");
            e.exit_code()
        }
    }
}
