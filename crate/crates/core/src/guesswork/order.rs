use serde::Serialize;

use super::{build_rank_table, GuessworkError};
use crate::measures::MeasureError;
use crate::source::{CategoricalSource, SequenceSource};

/// Largest log-ratio residual accepted for `log ρᵢ = α log θᵢ + c`.
pub const ORDER_FIT_TOLERANCE: f64 = 1e-9;

/// First string whose rank differs between the two sources.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OrderWitness {
    pub n: usize,
    pub word: String,
    pub rank_mu: u64,
    pub rank_rho: u64,
    /// The string `mu` guesses at position `rank_rho`.
    pub displaced: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEquivalence {
    /// Analytic verdict and rank comparison agree on equivalence.
    pub equivalent: bool,
    /// `ρ` is a positive-order tilt of `μ` by the log-ratio fit.
    pub is_positive_tilt: bool,
    pub fitted_alpha: f64,
    pub fit_residual: f64,
    /// All rank tables for `n ≤ checked_up_to` coincide.
    pub ranks_agree: bool,
    pub checked_up_to: usize,
    pub witness: Option<OrderWitness>,
}

/// Least-squares fit of `log ρᵢ = α log θᵢ + c`; returns `(α, max residual)`.
fn fit_log_ratio(mu: &CategoricalSource, rho: &CategoricalSource) -> (f64, f64) {
    let x = mu.log_probs();
    let y = rho.log_probs();
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let alpha = sxy / sxx;
    let c = my - alpha * mx;
    let residual = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - alpha * a - c).abs())
        .fold(0.0, f64::max);
    (alpha, residual)
}

/// Decides whether `rho` induces the same guessing order as `mu` for every
/// length: analytically by fitting a tilt order, and by comparing the full rank
/// tables for `n = 1..=n_max`.
pub fn order_equivalent(
    mu: &CategoricalSource,
    rho: &CategoricalSource,
    n_max: usize,
    budget: u64,
) -> Result<OrderEquivalence, GuessworkError> {
    if !mu.same_alphabet(rho) {
        return Err(MeasureError::AlphabetMismatch.into());
    }
    let (fitted_alpha, fit_residual) = fit_log_ratio(mu, rho);
    let is_positive_tilt = fitted_alpha > 0.0 && fit_residual < ORDER_FIT_TOLERANCE;

    let mu_src = SequenceSource::Categorical(mu.clone());
    let rho_src = SequenceSource::Categorical(rho.clone());
    let mut witness = None;
    let mut checked_up_to = 0;
    for n in 1..=n_max {
        let tm = build_rank_table(&mu_src, n, budget)?;
        let tr = build_rank_table(&rho_src, n, budget)?;
        checked_up_to = n;
        let diff = (0..tm.len()).find(|&c| tm.guesswork_of_code(c) != tr.guesswork_of_code(c));
        if let Some(code) = diff {
            let rank_rho = tr.guesswork_of_code(code);
            witness = Some(OrderWitness {
                n,
                word: tm.render(code),
                rank_mu: tm.guesswork_of_code(code),
                rank_rho,
                displaced: tm.render(tm.code_at_rank(rank_rho)),
            });
            break;
        }
    }
    let ranks_agree = witness.is_none();
    Ok(OrderEquivalence {
        equivalent: is_positive_tilt && ranks_agree,
        is_positive_tilt,
        fitted_alpha,
        fit_residual,
        ranks_agree,
        checked_up_to,
        witness,
    })
}
