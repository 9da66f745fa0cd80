//! Tilted weakly typical sets and the finite-n bound ledger evaluated on them.
//!
//! For a tilt order `α ≠ 0` and window `ε > 0`:
//!
//! ```text
//! A = { x : e^{−Hⁿ(T‖μ) − nε} < μⁿ(x) < e^{−Hⁿ(T‖μ) + nε} }
//! B = the ⌊|A|/2⌋ members of A with the smallest tilted probability
//! D = { x : Tⁿ(x) > e^{−Hⁿ(T) − n|α|ε} }
//! E = { x : Tⁿ(x) < e^{−Hⁿ(T) + n|α|ε} }
//! ```
//!
//! where `T = T(μ, α)`. Every set is obtained by one pass over the enumerated
//! strings, and every bound is checked against exact counts, probabilities and
//! ranks.

use serde::Serialize;

use super::{build_rank_table, GuessworkError, RankTable};
use crate::measures::MeasureBundle;
use crate::source::{CategoricalSource, SequenceSource};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TypicalSetSpec {
    pub alpha: f64,
    pub epsilon: f64,
    pub n: usize,
}

impl TypicalSetSpec {
    pub fn new(alpha: f64, epsilon: f64, n: usize) -> Result<Self, GuessworkError> {
        let spec = Self { alpha, epsilon, n };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<(), GuessworkError> {
        if !self.alpha.is_finite() || self.alpha == 0.0 {
            return Err(GuessworkError::InvalidSpec(format!("alpha must be finite and non-zero, got {}", self.alpha)));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 || !self.epsilon.is_finite() {
            return Err(GuessworkError::InvalidSpec(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if self.n == 0 {
            return Err(GuessworkError::InvalidSpec("n must be at least 1".into()));
        }
        Ok(())
    }
}

/// Members (as codes, ascending) and their total μ-probability.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct MemberSet {
    pub members: Vec<usize>,
    pub probability: f64,
}

impl MemberSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, code: usize) -> bool {
        self.members.binary_search(&code).is_ok()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Pass,
    /// The bound holds trivially: its Chebyshev prefactor is not positive or
    /// the set it quantifies over is empty.
    VacuousPass,
    Fail,
}

impl BoundStatus {
    pub fn passed(self) -> bool {
        !matches!(self, BoundStatus::Fail)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundStatus::Pass => "pass",
            BoundStatus::VacuousPass => "vacuous_pass",
            BoundStatus::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundCheck {
    pub id: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub status: BoundStatus,
}

impl BoundCheck {
    fn new(id: &'static str, lhs: f64, rhs: f64, holds: bool) -> Self {
        let status = if holds { BoundStatus::Pass } else { BoundStatus::Fail };
        Self { id, lhs, rhs, status }
    }

    fn vacuous(id: &'static str, lhs: f64, rhs: f64) -> Self {
        Self {
            id,
            lhs,
            rhs,
            status: BoundStatus::VacuousPass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetReport {
    pub spec: TypicalSetSpec,
    pub a: MemberSet,
    pub b: MemberSet,
    pub d: MemberSet,
    pub e: MemberSet,
    /// Chebyshev prefactor `1 − Vⁿ(T‖μ)/(n²ε²)` shared by the lower bounds.
    pub chebyshev_prefactor: f64,
    pub bounds: Vec<BoundCheck>,
}

impl SetReport {
    pub fn hard_failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.bounds.iter().filter(|b| b.status == BoundStatus::Fail)
    }

    pub fn all_pass(&self) -> bool {
        self.bounds.iter().all(|b| b.status.passed())
    }
}

/// Builds the rank table and evaluates the sets and the bound ledger.
pub fn typical_set(source: &CategoricalSource, spec: TypicalSetSpec, budget: u64) -> Result<SetReport, GuessworkError> {
    spec.check()?;
    let table = build_rank_table(&SequenceSource::Categorical(source.clone()), spec.n, budget)?;
    typical_set_with_table(source, &table, spec)
}

/// Only the bound ledger of [`typical_set`].
pub fn bound_ledger(source: &CategoricalSource, spec: TypicalSetSpec, budget: u64) -> Result<Vec<BoundCheck>, GuessworkError> {
    Ok(typical_set(source, spec, budget)?.bounds)
}

/// As [`typical_set`], reusing a rank table built from `source` at length `spec.n`.
pub fn typical_set_with_table(
    source: &CategoricalSource,
    table: &RankTable,
    spec: TypicalSetSpec,
) -> Result<SetReport, GuessworkError> {
    spec.check()?;
    if table.n() != spec.n || table.alphabet() != source.alphabet() {
        return Err(GuessworkError::InvalidSpec(
            "rank table does not match the source and string length".into(),
        ));
    }
    let TypicalSetSpec { alpha, epsilon, n } = spec;
    let nf = n as f64;
    let m = MeasureBundle::of_tilt(source, alpha, n);
    let log_norm = nf * source.log_partition(alpha);
    let tilted = |lp: f64| alpha * lp - log_norm;

    let a_lo = -m.cross_entropy - nf * epsilon;
    let a_hi = -m.cross_entropy + nf * epsilon;
    let de_lo = -m.entropy - nf * alpha.abs() * epsilon;
    let de_hi = -m.entropy + nf * alpha.abs() * epsilon;

    let mut a = MemberSet::default();
    let mut d = MemberSet::default();
    let mut e = MemberSet::default();
    for (code, &lp) in table.log_probs().iter().enumerate() {
        let p = lp.exp();
        let tl = tilted(lp);
        if lp > a_lo && lp < a_hi {
            a.members.push(code);
            a.probability += p;
        }
        if tl > de_lo {
            d.members.push(code);
            d.probability += p;
        }
        if tl < de_hi {
            e.members.push(code);
            e.probability += p;
        }
    }

    let mut by_tilt = a.members.clone();
    by_tilt.sort_by(|&x, &y| {
        tilted(table.log_prob(x))
            .total_cmp(&tilted(table.log_prob(y)))
            .then(x.cmp(&y))
    });
    by_tilt.truncate(a.len() / 2);
    by_tilt.sort_unstable();
    let b = MemberSet {
        probability: by_tilt.iter().map(|&c| table.log_prob(c).exp()).sum(),
        members: by_tilt,
    };

    let prefactor = 1.0 - m.cross_varentropy / (nf * nf * epsilon * epsilon);
    let bounds = ledger(table, &m, spec, prefactor, &a, &b, &d, &e);
    Ok(SetReport {
        spec,
        a,
        b,
        d,
        e,
        chebyshev_prefactor: prefactor,
        bounds,
    })
}

#[allow(clippy::too_many_arguments)]
fn ledger(
    table: &RankTable,
    m: &MeasureBundle,
    spec: TypicalSetSpec,
    prefactor: f64,
    a: &MemberSet,
    b: &MemberSet,
    d: &MemberSet,
    e: &MemberSet,
) -> Vec<BoundCheck> {
    let TypicalSetSpec { alpha, epsilon, n } = spec;
    let nf = n as f64;
    let abs_a = alpha.abs();
    let mut out = Vec::new();

    // (a) per-member probability window
    let a_probs = a.members.iter().map(|&c| table.log_prob(c).exp());
    let lo = (-m.cross_entropy - nf * epsilon).exp();
    let hi = (-m.cross_entropy + nf * epsilon).exp();
    if a.is_empty() {
        out.push(BoundCheck::vacuous("a.prob_lower", f64::NAN, lo));
        out.push(BoundCheck::vacuous("a.prob_upper", f64::NAN, hi));
    } else {
        let min = a_probs.clone().fold(f64::INFINITY, f64::min);
        let max = a_probs.fold(f64::NEG_INFINITY, f64::max);
        out.push(BoundCheck::new("a.prob_lower", min, lo, min > lo));
        out.push(BoundCheck::new("a.prob_upper", max, hi, max < hi));
    }

    // (b) size
    let size = a.len() as f64;
    let rhs = prefactor * (m.entropy - abs_a * nf * epsilon).exp();
    out.push(if prefactor <= 0.0 {
        BoundCheck::vacuous("b.size_lower", size, rhs)
    } else {
        BoundCheck::new("b.size_lower", size, rhs, size > rhs)
    });
    let rhs = (m.entropy + abs_a * nf * epsilon).exp();
    out.push(BoundCheck::new("b.size_upper", size, rhs, size < rhs));

    // (c) / (d) probabilities
    let slack = (1.0 - alpha).abs() * nf * epsilon;
    let p_lower = prefactor * (-m.relative_entropy - slack).exp();
    let p_upper = (-m.relative_entropy + slack).exp();
    let mut probability_part = |tag: char, inner: &MemberSet, outer: &MemberSet| {
        let id = |s: &'static str| -> &'static str {
            match (tag, s) {
                ('c', "ge") => "c.pd_ge_pa",
                ('c', "lower") => "c.pa_lower",
                ('c', "upper") => "c.pd_upper",
                ('c', "complement") => "c.pe_lower",
                ('d', "ge") => "d.pe_ge_pa",
                ('d', "lower") => "d.pa_lower",
                ('d', "upper") => "d.pe_upper",
                _ => "d.pd_lower",
            }
        };
        out.push(BoundCheck::new(id("ge"), inner.probability, a.probability, inner.probability >= a.probability));
        out.push(if prefactor <= 0.0 {
            BoundCheck::vacuous(id("lower"), a.probability, p_lower)
        } else {
            BoundCheck::new(id("lower"), a.probability, p_lower, a.probability > p_lower)
        });
        out.push(BoundCheck::new(id("upper"), inner.probability, p_upper, inner.probability <= p_upper));
        let rhs = 1.0 - p_upper;
        out.push(BoundCheck::new(id("complement"), outer.probability, rhs, outer.probability >= rhs));
    };
    if !(0.0..1.0).contains(&alpha) {
        probability_part('c', d, e);
    }
    if alpha > 0.0 && alpha <= 1.0 {
        probability_part('d', e, d);
    }

    // (e) / (f) rank implications; G for α > 0, R for α < 0
    let rank = |code: usize| -> f64 {
        if alpha > 0.0 {
            table.guesswork_of_code(code) as f64
        } else {
            table.reverse_guesswork_of_code(code) as f64
        }
    };
    let ids: [&'static str; 4] = if alpha > 0.0 {
        ["e.g_lower_on_b", "e.g_upper_on_d", "e.small_g_in_d", "e.large_g_in_e"]
    } else {
        ["f.r_lower_on_b", "f.r_upper_on_d", "f.small_r_in_d", "f.large_r_in_e"]
    };
    let low_level = prefactor * (m.entropy - abs_a * nf * epsilon).exp();
    let high_level = (m.entropy + abs_a * nf * epsilon).exp();

    let rhs = 0.5 * low_level;
    let min_b = b.members.iter().map(|&c| rank(c)).fold(f64::INFINITY, f64::min);
    out.push(if prefactor <= 0.0 || b.is_empty() {
        BoundCheck::vacuous(ids[0], min_b, rhs)
    } else {
        BoundCheck::new(ids[0], min_b, rhs, min_b > rhs)
    });

    let max_d = d.members.iter().map(|&c| rank(c)).fold(f64::NEG_INFINITY, f64::max);
    out.push(if d.is_empty() {
        BoundCheck::vacuous(ids[1], max_d, high_level)
    } else {
        BoundCheck::new(ids[1], max_d, high_level, max_d <= high_level)
    });

    // every string ranked at or below `low_level` lies in D:
    // the smallest rank outside D must exceed it
    let outside_d = (0..table.len()).filter(|&c| !d.contains(c)).map(rank);
    let min_out_d = outside_d.fold(f64::INFINITY, f64::min);
    out.push(if prefactor <= 0.0 {
        BoundCheck::vacuous(ids[2], min_out_d, low_level)
    } else {
        BoundCheck::new(ids[2], min_out_d, low_level, min_out_d > low_level)
    });

    // every string ranked above `high_level` lies in E:
    // the largest rank outside E must not exceed it
    let outside_e = (0..table.len()).filter(|&c| !e.contains(c)).map(rank);
    let max_out_e = outside_e.fold(0.0, f64::max);
    out.push(BoundCheck::new(ids[3], max_out_e, high_level, max_out_e <= high_level));

    out
}
