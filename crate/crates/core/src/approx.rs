//! Closed-form finite-`n` approximations of guesswork, reverse guesswork and
//! tilted typical-set sizes, stitched into an approximate guesswork PMF.
//!
//! For a tilt order `α` with word entropy `H = Hⁿ(T(μ,α))` and varentropy
//! `V = Vⁿ(T(μ,α))` the rank of strings at information level `Hⁿ(T(μ,α)‖μ)`
//! is approximated by
//!
//! ```text
//! e^H / (√(π/2·V) + √(π/2·V + 4))
//! ```
//!
//! read as `G` on the positive branch and as `R` on the negative branch.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::guesswork::{enumerate_log_probs, enumeration_size, GuessworkError, RankTable};
use crate::measures::MeasureBundle;
use crate::numeric::{log_sum_exp, weighted_mean_var};
use crate::source::{CategoricalSource, SequenceSource};

/// Varentropy below which the set-size formula is rejected.
pub const DEGENERATE_VARIANCE: f64 = 1e-12;
/// Largest accepted `|log k_approx − log k|` for the stitched curve.
pub const FIDELITY_THRESHOLD: f64 = 0.35;
/// Ranks closer than this to either end are excluded from the fidelity check.
pub const FIDELITY_MARGIN: u64 = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApproxError {
    #[error("varentropy must be non-negative, got {0}")]
    NegativeVariance(f64),
    #[error("tilted varentropy {0} is too small for the set-size approximation")]
    DegenerateVariance(f64),
    #[error("tilt order must be finite and non-zero, got {0}")]
    InvalidAlpha(f64),
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("invalid tilt-order grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Guesswork(#[from] GuessworkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ApproxBranch {
    Forward,
    Reverse,
}

impl ApproxBranch {
    pub fn of_alpha(alpha: f64) -> Self {
        if alpha > 0.0 {
            ApproxBranch::Forward
        } else {
            ApproxBranch::Reverse
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ApproxBranch::Forward => "forward",
            ApproxBranch::Reverse => "reverse",
        }
    }
}

/// Approximate guesswork and reverse guesswork of one level set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxRank {
    pub guesswork: f64,
    pub reverse_guesswork: f64,
}

/// `e^H / (√(π/2·V) + √(π/2·V + 4))`; exactly `e^H / 2` when `V = 0`.
pub fn rank_estimate(entropy: f64, varentropy: f64) -> Result<f64, ApproxError> {
    if varentropy.is_nan() || varentropy < 0.0 {
        return Err(ApproxError::NegativeVariance(varentropy));
    }
    let s = 0.5 * PI * varentropy;
    Ok(entropy.exp() / (s.sqrt() + (s + 4.0).sqrt()))
}

/// Applies [`rank_estimate`] on a branch; the other rank follows from
/// `G + R = total + 1`.
pub fn approx_guesswork(entropy: f64, varentropy: f64, branch: ApproxBranch, total: f64) -> Result<ApproxRank, ApproxError> {
    let est = rank_estimate(entropy, varentropy)?;
    Ok(match branch {
        ApproxBranch::Forward => ApproxRank {
            guesswork: est,
            reverse_guesswork: total + 1.0 - est,
        },
        ApproxBranch::Reverse => ApproxRank {
            guesswork: total + 1.0 - est,
            reverse_guesswork: est,
        },
    })
}

/// Approximate size of the tilted weakly typical set of order `alpha`.
///
/// Negative orders use `|α|` in the exponent.
pub fn approx_set_size(source: &CategoricalSource, alpha: f64, epsilon: f64, n: usize) -> Result<f64, ApproxError> {
    if !alpha.is_finite() || alpha == 0.0 {
        return Err(ApproxError::InvalidAlpha(alpha));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(ApproxError::InvalidEpsilon(epsilon));
    }
    let m = MeasureBundle::of_tilt(source, alpha, n);
    if m.varentropy < DEGENERATE_VARIANCE {
        return Err(ApproxError::DegenerateVariance(m.varentropy));
    }
    let width = alpha.abs() * n as f64 * epsilon;
    Ok((1.0 - (-2.0 * width).exp()) / (2.0 * PI * m.varentropy).sqrt() * (m.entropy + width).exp())
}

/// Entropy and varentropy of the length-`n` word distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WordMeasures {
    pub n: usize,
    pub entropy: f64,
    pub varentropy: f64,
}

/// Word-level measures; memoryless sources scale the per-symbol values, other
/// sources are enumerated.
pub fn word_measures(source: &SequenceSource, n: usize, budget: u64) -> Result<WordMeasures, ApproxError> {
    if let Some(cat) = source.as_categorical() {
        let m = MeasureBundle::of_tilt(cat, 1.0, n);
        return Ok(WordMeasures {
            n,
            entropy: m.entropy,
            varentropy: m.varentropy,
        });
    }
    let lp = enumerate_log_probs(source, n, budget)?;
    let info: Vec<f64> = lp.iter().map(|v| -v).collect();
    let (entropy, varentropy) = weighted_mean_var(&lp, &info);
    Ok(WordMeasures { n, entropy, varentropy })
}

/// Levels of the tilted word distribution at one order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TiltedLevels {
    /// `Hⁿ(T‖μ)`
    pub level: f64,
    /// `Hⁿ(T)`
    pub entropy: f64,
    /// `Vⁿ(T)`
    pub varentropy: f64,
}

/// Source of tilted word levels: closed form for memoryless sources, the
/// enumerated word vector otherwise.
pub enum LevelModel {
    Memoryless { source: CategoricalSource, n: usize },
    Enumerated { log_probs: Vec<f64> },
}

impl LevelModel {
    pub fn new(source: &SequenceSource, n: usize, budget: u64) -> Result<Self, ApproxError> {
        Ok(match source.as_categorical() {
            Some(cat) => LevelModel::Memoryless {
                source: cat.clone(),
                n,
            },
            None => {
                let lp = enumerate_log_probs(source, n, budget)?;
                LevelModel::Enumerated {
                    log_probs: lp.into_iter().filter(|v| v.is_finite()).collect(),
                }
            }
        })
    }

    pub fn at(&self, alpha: f64) -> TiltedLevels {
        match self {
            LevelModel::Memoryless { source, n } => {
                let m = MeasureBundle::of_tilt(source, alpha, *n);
                TiltedLevels {
                    level: m.cross_entropy,
                    entropy: m.entropy,
                    varentropy: m.varentropy,
                }
            }
            LevelModel::Enumerated { log_probs } => {
                let mut w: Vec<f64> = log_probs.iter().map(|lp| alpha * lp).collect();
                let z = log_sum_exp(&w);
                w.iter_mut().for_each(|v| *v -= z);
                let info: Vec<f64> = log_probs.iter().map(|v| -v).collect();
                let tilted_info: Vec<f64> = w.iter().map(|v| -v).collect();
                let (level, _) = weighted_mean_var(&w, &info);
                let (entropy, varentropy) = weighted_mean_var(&w, &tilted_info);
                TiltedLevels {
                    level,
                    entropy,
                    varentropy,
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproxPoint {
    pub branch: ApproxBranch,
    pub alpha: f64,
    /// `Hⁿ(T(μ,α)‖μ)`
    pub level: f64,
    pub tilted_entropy: f64,
    pub tilted_varentropy: f64,
    /// Approximate guesswork, clamped to `[1, |X|ⁿ]`.
    pub approx_rank: f64,
    /// `e^{−level}`
    pub probability: f64,
}

/// 61 logarithmically spaced magnitudes in `[1e-2, 20]`, on each sign.
pub fn default_alpha_grid() -> Vec<f64> {
    let (lo, hi) = (1e-2f64.ln(), 20f64.ln());
    let mags: Vec<f64> = (0..61).map(|i| (lo + (hi - lo) * i as f64 / 60.0).exp()).collect();
    mags.iter().rev().map(|m| -m).chain(mags.iter().copied()).collect()
}

fn check_grid(alphas: &[f64]) -> Result<(), ApproxError> {
    if let Some(&bad) = alphas.iter().find(|a| !a.is_finite() || **a == 0.0) {
        return Err(ApproxError::InvalidAlpha(bad));
    }
    if !alphas.iter().any(|&a| a > 0.0) || !alphas.iter().any(|&a| a < 0.0) {
        return Err(ApproxError::InvalidGrid("orders of both signs are required".into()));
    }
    Ok(())
}

/// Approximate guesswork PMF: one point per tilt order, sorted by rank.
pub fn approx_pmf_curve(
    source: &SequenceSource,
    n: usize,
    alphas: &[f64],
    budget: u64,
) -> Result<Vec<ApproxPoint>, ApproxError> {
    check_grid(alphas)?;
    let total = enumeration_size(source.alphabet().len(), n, u64::MAX)
        .map(|v| v as f64)
        .unwrap_or_else(|_| (source.alphabet().len() as f64).powi(n as i32));
    let model = LevelModel::new(source, n, budget)?;
    let mut points = alphas
        .par_iter()
        .map(|&alpha| {
            let lv = model.at(alpha);
            let branch = ApproxBranch::of_alpha(alpha);
            let r = approx_guesswork(lv.entropy, lv.varentropy, branch, total)?;
            Ok(ApproxPoint {
                branch,
                alpha,
                level: lv.level,
                tilted_entropy: lv.entropy,
                tilted_varentropy: lv.varentropy,
                approx_rank: r.guesswork.clamp(1.0, total),
                probability: (-lv.level).exp(),
            })
        })
        .collect::<Result<Vec<_>, ApproxError>>()?;
    points.sort_by(|a, b| {
        a.approx_rank
            .total_cmp(&b.approx_rank)
            .then(a.level.total_cmp(&b.level))
    });
    Ok(points)
}

/// Log approximate rank at information level `level`, linear in the level
/// between curve points and held constant beyond the ends.
pub fn interpolate_log_rank(curve: &[ApproxPoint], level: f64) -> f64 {
    let mut pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.level, p.approx_rank.ln())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    interpolate_sorted(&pts, level)
}

fn interpolate_sorted(pts: &[(f64, f64)], x: f64) -> f64 {
    let first = pts[0];
    let last = pts[pts.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let i = pts.partition_point(|p| p.0 <= x);
    let (x0, y0) = pts[i - 1];
    let (x1, y1) = pts[i];
    if x1 == x0 {
        return y0;
    }
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FidelityReport {
    pub n: usize,
    /// Number of exact ranks compared.
    pub checked: usize,
    pub max_error: f64,
    /// Exact rank at which `max_error` occurs.
    pub worst_rank: u64,
    pub threshold: f64,
    pub passed: bool,
}

fn finish(n: usize, errors: impl Iterator<Item = (u64, f64)>) -> FidelityReport {
    let mut checked = 0;
    let mut max_error = 0.0;
    let mut worst_rank = 0;
    for (k, e) in errors {
        checked += 1;
        if e > max_error {
            max_error = e;
            worst_rank = k;
        }
    }
    FidelityReport {
        n,
        checked,
        max_error,
        worst_rank,
        threshold: FIDELITY_THRESHOLD,
        passed: checked > 0 && max_error <= FIDELITY_THRESHOLD,
    }
}

fn curve_points(curve: &[ApproxPoint]) -> Vec<(f64, f64)> {
    let mut pts: Vec<(f64, f64)> = curve.iter().map(|p| (p.level, p.approx_rank.ln())).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts
}

/// `|log k_approx − log k|` at every exact rank `k` in
/// `[FIDELITY_MARGIN, |X|ⁿ − FIDELITY_MARGIN]`.
pub fn fidelity(table: &RankTable, curve: &[ApproxPoint]) -> FidelityReport {
    let pts = curve_points(curve);
    let total = table.len() as u64;
    let hi = total.saturating_sub(FIDELITY_MARGIN);
    let errors = (FIDELITY_MARGIN..=hi).map(|k| {
        let level = -table.log_prob(table.code_at_rank(k));
        (k, (interpolate_sorted(&pts, level) - (k as f64).ln()).abs())
    });
    finish(table.n(), errors)
}

/// Same comparison with each tie class represented once, by the midpoint of
/// its rank range.
pub fn fidelity_tie_midpoints(table: &RankTable, curve: &[ApproxPoint]) -> FidelityReport {
    let pts = curve_points(curve);
    let total = table.len() as f64;
    let lo = FIDELITY_MARGIN as f64;
    let hi = total - FIDELITY_MARGIN as f64;
    let errors = table.tie_classes().into_iter().filter_map(|range| {
        let mid = 0.5 * ((range.start + 1) as f64 + range.end as f64);
        if mid < lo || mid > hi {
            return None;
        }
        let level = -table.log_prob(table.code_at_rank(range.start as u64 + 1));
        Some((mid.round() as u64, (interpolate_sorted(&pts, level) - mid.ln()).abs()))
    });
    finish(table.n(), errors)
}
