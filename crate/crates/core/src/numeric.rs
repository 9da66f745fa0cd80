//! Small numeric helpers shared by the measure and source code.

/// `log Σ exp(x_i)` with max-shift; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Normalizes log-weights in place so that they exponentiate to a probability vector.
pub fn normalize_log_weights(log_weights: &mut [f64]) {
    let norm = log_sum_exp(log_weights);
    for w in log_weights.iter_mut() {
        *w -= norm;
    }
}

/// Mean and variance of `values` under the distribution given by `log_probs`.
pub fn weighted_mean_var(log_probs: &[f64], values: &[f64]) -> (f64, f64) {
    debug_assert_eq!(log_probs.len(), values.len());
    let mut mean = 0.0;
    for (lp, v) in log_probs.iter().zip(values) {
        let p = lp.exp();
        if p > 0.0 {
            mean += p * v;
        }
    }
    let mut var = 0.0;
    for (lp, v) in log_probs.iter().zip(values) {
        let p = lp.exp();
        if p > 0.0 {
            let d = v - mean;
            var += p * d * d;
        }
    }
    (mean, var)
}
