//! The acceptance suite as library code, shared by the `verify` subcommand and
//! the `acceptance` test target.
//!
//! Every criterion is reported as a set of metrics, each with the worst value
//! seen, its tolerance and a pass flag. Diagnostics are reported alongside but
//! never decide the outcome.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::approx::{
    approx_pmf_curve, default_alpha_grid, fidelity, fidelity_tie_midpoints, rank_estimate, FIDELITY_THRESHOLD,
};
use crate::guesswork::{
    build_rank_table, order_equivalent, typical_set_with_table, BoundStatus, RankTable, TypicalSetSpec,
    DEFAULT_BUDGET,
};
use crate::measures::identities;
use crate::measures::varentropy;
use crate::rate::{cross_entropy_range, rate, rate_curve, rate_g, rate_r, RateKind};
use crate::shipped;
use crate::source::{CategoricalSource, SequenceSource};

pub const DEFAULT_SEED: u64 = 20_190_527;

const IDENTITY_ALPHAS: [f64; 7] = [-3.0, -2.0, -1.0, -0.5, 0.5, 2.0, 3.0];
const IDENTITY_LENGTHS: [usize; 3] = [1, 4, 8];
const IDENTITY_TOLERANCE: f64 = 1e-10;
const DERIVATIVE_STEP: f64 = 1e-5;
const DERIVATIVE_TOLERANCE: f64 = 1e-5;
const ORDER_ALPHAS: [f64; 4] = [0.3, 0.5, 2.0, 5.0];
const ORDER_MAX_LENGTH: usize = 8;
const RATE_SAMPLES: usize = 41;
const RATE_SLOPE_STEP: f64 = 1e-5;
const RATE_CURVATURE_STEP: f64 = 1e-4;
const RATE_SLOPE_TOLERANCE: f64 = 1e-4;
const RATE_CURVATURE_TOLERANCE: f64 = 5e-3;
const SHAPE_TOLERANCE: f64 = 1e-9;
const CORRIDOR_HALF_WIDTH: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VerifyConfig {
    /// Fewer random sources and lengths.
    pub quick: bool,
    pub seed: u64,
    pub budget: u64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            quick: false,
            seed: DEFAULT_SEED,
            budget: DEFAULT_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metric {
    pub label: String,
    pub checks: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Metric {
    fn new(label: impl Into<String>, tolerance: f64) -> Self {
        Self {
            label: label.into(),
            checks: 0,
            worst: 0.0,
            tolerance,
            passed: true,
        }
    }

    fn record(&mut self, value: f64) {
        self.checks += 1;
        if value.is_nan() {
            self.worst = f64::NAN;
            self.passed = false;
            return;
        }
        if !self.worst.is_nan() && value > self.worst {
            self.worst = value;
        }
        if value > self.tolerance {
            self.passed = false;
        }
    }

    /// Records a yes/no check as a mismatch count against tolerance 0.
    fn record_bool(&mut self, ok: bool) {
        self.record(if ok { 0.0 } else { 1.0 });
    }

    fn single(label: impl Into<String>, value: f64, tolerance: f64) -> Self {
        let mut m = Self::new(label, tolerance);
        m.record(value);
        m
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub metrics: Vec<Metric>,
    pub diagnostics: Vec<Metric>,
    pub notes: Vec<String>,
}

impl CriterionOutcome {
    fn new(id: u32, name: &'static str, metrics: Vec<Metric>, diagnostics: Vec<Metric>, notes: Vec<String>) -> Self {
        let passed = !metrics.is_empty() && metrics.iter().all(|m| m.passed);
        Self {
            id,
            name,
            passed,
            metrics,
            diagnostics,
            notes,
        }
    }

    fn errored(id: u32, name: &'static str, message: String) -> Self {
        Self {
            id,
            name,
            passed: false,
            metrics: Vec::new(),
            diagnostics: Vec::new(),
            notes: vec![format!("error: {message}")],
        }
    }

    /// One-line summary: `PASS criterion 3 (order equivalence) ...`.
    pub fn summary_line(&self) -> String {
        let worst = self
            .metrics
            .iter()
            .filter(|m| !m.passed)
            .chain(self.metrics.iter())
            .next()
            .map(|m| format!("; {} worst={:.3e} tol={:.1e}", m.label, m.worst, m.tolerance))
            .unwrap_or_default();
        let checks: usize = self.metrics.iter().map(|m| m.checks).sum();
        format!(
            "{} criterion {} ({}): {} checks{}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            checks,
            worst
        )
    }

    /// Summary line followed by one indented line per metric, diagnostic and note.
    pub fn detail_lines(&self) -> Vec<String> {
        let mut out = vec![self.summary_line()];
        for m in &self.metrics {
            out.push(format!(
                "    {} {}: worst={:.6e} tol={:.1e} checks={}",
                if m.passed { "ok  " } else { "FAIL" },
                m.label,
                m.worst,
                m.tolerance,
                m.checks
            ));
        }
        for m in &self.diagnostics {
            out.push(format!(
                "    diag {}: worst={:.6e} tol={:.1e} checks={} ({})",
                m.label,
                m.worst,
                m.tolerance,
                m.checks,
                if m.passed { "within" } else { "outside" }
            ));
        }
        for n in &self.notes {
            out.push(format!("    note {n}"));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub passed: bool,
    pub outcomes: Vec<CriterionOutcome>,
}

/// A random source on `2..=6` symbols whose weights are drawn from `[0.05, 1)`,
/// redrawn until the extreme symbols are unique.
pub fn random_source(rng: &mut ChaCha8Rng) -> CategoricalSource {
    loop {
        let k = rng.gen_range(2..=6);
        let w: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = w.iter().sum();
        let p: Vec<f64> = w.iter().map(|x| x / total).collect();
        if let Ok(s) = CategoricalSource::with_letters(&p) {
            return s;
        }
    }
}

pub fn random_sources(seed: u64, count: usize) -> Vec<CategoricalSource> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_source(&mut rng)).collect()
}

fn source_count(cfg: &VerifyConfig) -> usize {
    if cfg.quick {
        10
    } else {
        50
    }
}

/// Tilt composition, both Rényi identities, the tilt-mean identity and
/// varentropy scaling on seeded random sources.
pub fn identity_suite(cfg: &VerifyConfig) -> CriterionOutcome {
    let mut composition = Metric::new("tilt composition", IDENTITY_TOLERANCE);
    let mut renyi_cross = Metric::new("renyi via cross entropy", IDENTITY_TOLERANCE);
    let mut renyi_tilted = Metric::new("renyi via tilted entropy", IDENTITY_TOLERANCE);
    let mut tilt_mean = Metric::new("tilt mean", IDENTITY_TOLERANCE);
    let mut scaling = Metric::new("varentropy scaling", IDENTITY_TOLERANCE);
    for mu in random_sources(cfg.seed, source_count(cfg)) {
        for a in IDENTITY_ALPHAS {
            for b in IDENTITY_ALPHAS {
                composition.record(identities::tilt_composition(&mu, a, b));
            }
            tilt_mean.record(identities::tilt_mean(&mu, a));
            for n in IDENTITY_LENGTHS {
                let (r1, r2) = identities::renyi(&mu, a, n);
                renyi_cross.record(r1.abs());
                renyi_tilted.record(r2.abs());
                scaling.record(identities::varentropy_scaling(&mu, a, n).abs());
            }
        }
    }
    CriterionOutcome::new(
        1,
        "identity suite",
        vec![composition, renyi_cross, renyi_tilted, tilt_mean, scaling],
        Vec::new(),
        vec![format!("{} sources from seed {}", source_count(cfg), cfg.seed)],
    )
}

/// Derivatives in the tilt order against central differences.
pub fn derivative_suite(cfg: &VerifyConfig) -> CriterionOutcome {
    let mut entropy = Metric::new("d/dα tilted entropy", DERIVATIVE_TOLERANCE);
    let mut cross = Metric::new("d/dα cross entropy", DERIVATIVE_TOLERANCE);
    let mut divergence = Metric::new("d/dα relative entropy", DERIVATIVE_TOLERANCE);
    let mut renyi = Metric::new("d/dα renyi entropy", DERIVATIVE_TOLERANCE);
    let mut limit = Metric::new("renyi slope at α=1 vs -V/2", DERIVATIVE_TOLERANCE);
    let h = DERIVATIVE_STEP;
    for mu in random_sources(cfg.seed, source_count(cfg)) {
        for n in IDENTITY_LENGTHS {
            for a in IDENTITY_ALPHAS {
                entropy.record(identities::entropy_slope(&mu, a, n, h).relative_error());
                cross.record(identities::cross_entropy_slope(&mu, a, n, h).relative_error());
                divergence.record(identities::relative_entropy_slope(&mu, a, n, h).relative_error());
                renyi.record(identities::renyi_slope(&mu, a, n, h).relative_error());
            }
            let at_one = identities::renyi_slope(&mu, 1.0, n, h);
            limit.record((at_one.finite_difference + 0.5 * varentropy(&mu, n)).abs());
        }
    }
    CriterionOutcome::new(
        2,
        "derivative suite",
        vec![entropy, cross, divergence, renyi, limit],
        Vec::new(),
        vec![format!("central differences with step {h}")],
    )
}

/// Sorted codes at 0-based rank positions `range`.
fn codes_at(table: &RankTable, range: std::ops::Range<usize>) -> Vec<usize> {
    let mut v: Vec<usize> = range.map(|p| table.code_at_rank(p as u64 + 1)).collect();
    v.sort_unstable();
    v
}

/// Every tie class of `mu` occupies the mirrored rank positions under `rho`.
fn reversed_up_to_ties(mu: &RankTable, rho: &RankTable) -> bool {
    let total = mu.len();
    mu.tie_classes()
        .into_iter()
        .all(|c| codes_at(mu, c.clone()) == codes_at(rho, total - c.end..total - c.start))
}

fn order_criterion(cfg: &VerifyConfig) -> Result<CriterionOutcome, String> {
    let mut tilts = Metric::new("tilt rank tables identical", 0.0);
    let mut reversed = Metric::new("reverse ranking mirrored up to ties", 0.0);
    let mut detected = Metric::new("non-tilt pair detected with witness", 0.0);
    let mut notes = Vec::new();
    for (name, mu) in [("s2", shipped::s2()), ("s3", shipped::s3())] {
        for a in ORDER_ALPHAS {
            let eq = order_equivalent(&mu, &mu.tilt(a), ORDER_MAX_LENGTH, cfg.budget).map_err(|e| e.to_string())?;
            tilts.record_bool(eq.ranks_agree && eq.checked_up_to == ORDER_MAX_LENGTH && eq.is_positive_tilt);
            if let Some(w) = eq.witness {
                notes.push(format!("{name} α={a}: unexpected witness {w:?}"));
            }
        }
        let fwd: SequenceSource = mu.clone().into();
        let rev: SequenceSource = mu.reverse().into();
        for n in 1..=ORDER_MAX_LENGTH {
            let t = build_rank_table(&fwd, n, cfg.budget).map_err(|e| e.to_string())?;
            let r = build_rank_table(&rev, n, cfg.budget).map_err(|e| e.to_string())?;
            reversed.record_bool(reversed_up_to_ties(&t, &r));
        }
    }
    let mu = shipped::s3();
    let rho = CategoricalSource::with_letters(&[0.25, 0.3, 0.45]).map_err(|e| e.to_string())?;
    let eq = order_equivalent(&mu, &rho, ORDER_MAX_LENGTH, cfg.budget).map_err(|e| e.to_string())?;
    detected.record_bool(!eq.equivalent && eq.witness.is_some());
    if let Some(w) = &eq.witness {
        notes.push(format!(
            "witness n={} {:?}: rank {} under μ, {} under ρ (ρ puts it where μ guesses {:?})",
            w.n, w.word, w.rank_mu, w.rank_rho, w.displaced
        ));
    }
    Ok(CriterionOutcome::new(
        3,
        "order equivalence",
        vec![tilts, reversed, detected],
        Vec::new(),
        notes,
    ))
}

/// Rank tables of tilts, the reversed ranking, and a non-tilt witness.
pub fn order_equivalence(cfg: &VerifyConfig) -> CriterionOutcome {
    order_criterion(cfg).unwrap_or_else(|e| CriterionOutcome::errored(3, "order equivalence", e))
}

fn ledger_criterion(cfg: &VerifyConfig) -> Result<CriterionOutcome, String> {
    let lengths: &[usize] = if cfg.quick { &[6, 8] } else { &[6, 8, 10] };
    let mu = shipped::s3();
    let src: SequenceSource = mu.clone().into();
    let mut failures = Metric::new("hard failures", 0.0);
    let mut vacuous_positive = Metric::new("vacuous with positive prefactor and non-empty sets", f64::INFINITY);
    let mut vacuous = 0usize;
    let mut reports = 0usize;
    let mut notes = Vec::new();
    for &n in lengths {
        let table = build_rank_table(&src, n, cfg.budget).map_err(|e| e.to_string())?;
        for alpha in [-2.0, -0.5, 0.5, 1.0, 2.0] {
            for eps in [0.05, 0.1, 0.2] {
                let spec = TypicalSetSpec::new(alpha, eps, n).map_err(|e| e.to_string())?;
                let report = typical_set_with_table(&mu, &table, spec).map_err(|e| e.to_string())?;
                reports += 1;
                for b in report.hard_failures() {
                    notes.push(format!("n={n} α={alpha} ε={eps}: {} lhs={} rhs={}", b.id, b.lhs, b.rhs));
                }
                failures.record(report.hard_failures().count() as f64);
                let v = report.bounds.iter().filter(|b| b.status == BoundStatus::VacuousPass).count();
                vacuous += v;
                let sets_nonempty = report.a.len() > 1 && !report.b.is_empty();
                vacuous_positive.record(if v > 0 && report.chebyshev_prefactor > 0.0 && sets_nonempty {
                    v as f64
                } else {
                    0.0
                });
            }
        }
    }
    notes.push(format!("{reports} parameter sets, {vacuous} bounds vacuous"));
    Ok(CriterionOutcome::new(4, "typical-set bound ledger", vec![failures], vec![vacuous_positive], notes))
}

/// Every finite-`n` bound on the tilted typical sets of the ternary source.
pub fn bound_ledger_suite(cfg: &VerifyConfig) -> CriterionOutcome {
    ledger_criterion(cfg).unwrap_or_else(|e| CriterionOutcome::errored(4, "typical-set bound ledger", e))
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

fn rate_criterion(_cfg: &VerifyConfig) -> Result<CriterionOutcome, String> {
    let mut shape = Metric::new("convexity/concavity violation", SHAPE_TOLERANCE);
    let mut slope = Metric::new("slope vs closed form (relative)", RATE_SLOPE_TOLERANCE);
    let mut curvature = Metric::new("curvature vs closed form (relative)", RATE_CURVATURE_TOLERANCE);
    let err = |e: crate::rate::RateError| e.to_string();
    for mu in [shipped::s2(), shipped::s3()] {
        for kind in [RateKind::Forward, RateKind::Reverse, RateKind::Information] {
            let curve = rate_curve(&mu, kind, RATE_SAMPLES).map_err(err)?;
            for w in curve.samples.windows(3) {
                let d2 = w[0].j - 2.0 * w[1].j + w[2].j;
                shape.record(match kind {
                    RateKind::Reverse => d2.max(0.0),
                    _ => (-d2).max(0.0),
                });
            }
            for s in &curve.samples {
                let f = |t: f64| rate(&mu, kind, t);
                let (h1, h2) = (RATE_SLOPE_STEP, RATE_CURVATURE_STEP);
                let fd1 = (f(s.t + h1).map_err(err)? - f(s.t - h1).map_err(err)?) / (2.0 * h1);
                let fd2 = (f(s.t + h2).map_err(err)? - 2.0 * s.j + f(s.t - h2).map_err(err)?) / (h2 * h2);
                slope.record(relative(fd1, s.djdt));
                curvature.record(relative(fd2, s.d2jdt2));
            }
        }
    }
    let s2 = shipped::s2();
    let range = cross_entropy_range(&s2);
    let metrics = vec![
        shape,
        slope,
        curvature,
        Metric::single("s2 J^g(log 2) vs 0.223144", (rate_g(&s2, 2f64.ln()).map_err(err)? - 0.223144).abs(), 1e-6),
        Metric::single("s2 J^g(0) vs 0.223144", (rate_g(&s2, 0.0).map_err(err)? - 0.223144).abs(), 1e-6),
        Metric::single("s2 J^r(0) vs 1.609438", (rate_r(&s2, 0.0).map_err(err)? - 1.609438).abs(), 1e-6),
        Metric::single("s2 t- vs log(1/0.8)", (range.t_minus - 1.25f64.ln()).abs(), 1e-9),
        Metric::single("s2 t+ vs log 5", (range.t_plus - 5f64.ln()).abs(), 1e-9),
    ];
    Ok(CriterionOutcome::new(
        5,
        "rate functions",
        metrics,
        Vec::new(),
        vec![format!(
            "{RATE_SAMPLES} interior samples per curve on s2 and s3; slope step {RATE_SLOPE_STEP}, curvature step {RATE_CURVATURE_STEP}"
        )],
    ))
}

/// Shape, derivative identities and endpoint values of the rate functions.
pub fn rate_function_suite(cfg: &VerifyConfig) -> CriterionOutcome {
    rate_criterion(cfg).unwrap_or_else(|e| CriterionOutcome::errored(5, "rate functions", e))
}

/// Per-rank and tie-midpoint fidelity of the stitched curve for one source.
fn fidelity_metrics(
    name: &str,
    source: &SequenceSource,
    n: usize,
    budget: u64,
) -> Result<(Metric, Metric), String> {
    let table = build_rank_table(source, n, budget).map_err(|e| e.to_string())?;
    let curve = approx_pmf_curve(source, n, &default_alpha_grid(), budget).map_err(|e| e.to_string())?;
    let per_rank = fidelity(&table, &curve);
    let mid = fidelity_tie_midpoints(&table, &curve);
    let mut m = Metric::single(format!("{name} n={n} |log k_approx - log k|"), per_rank.max_error, FIDELITY_THRESHOLD);
    m.checks = per_rank.checked;
    let mut d = Metric::single(format!("{name} n={n} tie-class midpoints"), mid.max_error, FIDELITY_THRESHOLD);
    d.checks = mid.checked;
    Ok((m, d))
}

fn approximation_criterion(cfg: &VerifyConfig) -> Result<CriterionOutcome, String> {
    let mut metrics = Vec::new();
    let mut diagnostics = Vec::new();
    let cases: Vec<(&str, SequenceSource, usize)> = vec![
        ("s2", shipped::s2().into(), 8),
        ("s2", shipped::s2().into(), 16),
        ("s3", shipped::s3().into(), 8),
    ];
    for (name, src, n) in &cases {
        let (m, d) = fidelity_metrics(name, src, *n, cfg.budget)?;
        metrics.push(m);
        diagnostics.push(d);
    }
    let mut uniform = Metric::new("V=0 point vs half the space (relative)", 1e-12);
    for (k, n) in [(2usize, 8usize), (2, 16), (3, 8)] {
        let h = n as f64 * (k as f64).ln();
        let half = 0.5 * (k as f64).powi(n as i32);
        let est = rank_estimate(h, 0.0).map_err(|e| e.to_string())?;
        uniform.record(if est == h.exp() / 2.0 { relative(est, half) } else { f64::INFINITY });
    }
    metrics.push(uniform);
    Ok(CriterionOutcome::new(
        6,
        "approximation fidelity",
        metrics,
        diagnostics,
        vec!["ranks 8..=|X|^n-8 against the curve from the default tilt-order grid".into()],
    ))
}

/// Stitched approximate PMF against the exact staircase for memoryless sources.
pub fn approximation_fidelity(cfg: &VerifyConfig) -> CriterionOutcome {
    approximation_criterion(cfg).unwrap_or_else(|e| CriterionOutcome::errored(6, "approximation fidelity", e))
}

fn concordance_criterion(cfg: &VerifyConfig) -> Result<CriterionOutcome, String> {
    let mut metrics = Vec::new();
    let mut diagnostics = Vec::new();
    for (name, src) in [("s3_markov", shipped::s3_markov()), ("s3_hmm", shipped::s3_hmm())] {
        let (m, d) = fidelity_metrics(name, &src, 8, cfg.budget)?;
        metrics.push(m);
        diagnostics.push(d);
    }
    Ok(CriterionOutcome::new(
        7,
        "markov/hmm concordance",
        metrics,
        diagnostics,
        vec!["word distributions enumerated with a stationary initial distribution".into()],
    ))
}

/// The same fidelity check for the Markov and hidden Markov sources.
pub fn markov_concordance(cfg: &VerifyConfig) -> CriterionOutcome {
    concordance_criterion(cfg).unwrap_or_else(|e| CriterionOutcome::errored(7, "markov/hmm concordance", e))
}

/// `−(1/n) log P{|log G/n − t| < ε}` from an exact rank table.
pub fn empirical_guesswork_rate(table: &RankTable, t: f64, epsilon: f64) -> f64 {
    let n = table.n() as f64;
    let p: f64 = table
        .records()
        .filter(|r| ((r.guesswork as f64).ln() / n - t).abs() < epsilon)
        .map(|r| r.log_prob.exp())
        .sum();
    -p.ln() / n
}

fn corridor_criterion(cfg: &VerifyConfig) -> Result<CriterionOutcome, String> {
    let mu = shipped::s3();
    let table = build_rank_table(&mu.clone().into(), 10, cfg.budget).map_err(|e| e.to_string())?;
    let mut metric = Metric::new("|empirical rate - J^g(t)|", CORRIDOR_HALF_WIDTH);
    let mut notes = Vec::new();
    for t in [0.4, 0.7, 1.0] {
        let emp = empirical_guesswork_rate(&table, t, 0.1);
        let j = rate_g(&mu, t).map_err(|e| e.to_string())?;
        metric.record((emp - j).abs());
        notes.push(format!("t={t}: empirical {emp:.4}, J^g {j:.4}"));
    }
    Ok(CriterionOutcome::new(8, "finite-n rate corridor", vec![metric], Vec::new(), notes))
}

/// Finite-length large-deviation corridor for the ternary source at `n = 10`.
pub fn rate_corridor(cfg: &VerifyConfig) -> CriterionOutcome {
    corridor_criterion(cfg).unwrap_or_else(|e| CriterionOutcome::errored(8, "finite-n rate corridor", e))
}

/// Runs criteria 1 to 8 in order.
pub fn run_all(cfg: &VerifyConfig) -> VerifyReport {
    let outcomes = vec![
        identity_suite(cfg),
        derivative_suite(cfg),
        order_equivalence(cfg),
        bound_ledger_suite(cfg),
        rate_function_suite(cfg),
        approximation_fidelity(cfg),
        markov_concordance(cfg),
        rate_corridor(cfg),
    ];
    VerifyReport {
        config: *cfg,
        passed: outcomes.iter().all(|o| o.passed),
        outcomes,
    }
}
