//! Information measures of memoryless sources, in nats.
//!
//! Every length-`n` quantity is `n` times its per-symbol value. Two-argument
//! measures take `(rho, mu)` with the expectation under `rho` and `mu` inside
//! the logarithm: `cross_entropy(rho, mu, n) = n Σ ρᵢ log(1/μᵢ)`.

use serde::Serialize;
use thiserror::Error;

use crate::numeric::log_sum_exp;
use crate::source::{CategoricalSource, SourceError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("sources are defined on different alphabets")]
    AlphabetMismatch,
    #[error(transparent)]
    Source(#[from] SourceError),
}

/// `|1 − α|` below which the Rényi entropy is replaced by its Shannon limit.
pub const RENYI_SHANNON_BAND: f64 = 1e-9;

fn check_alphabets(rho: &CategoricalSource, mu: &CategoricalSource) -> Result<(), MeasureError> {
    if rho.same_alphabet(mu) {
        Ok(())
    } else {
        Err(MeasureError::AlphabetMismatch)
    }
}

/// Σ ρᵢ · f(i), skipping zero-mass symbols.
fn expect(rho: &CategoricalSource, f: impl Fn(usize) -> f64) -> f64 {
    rho.probs()
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > 0.0)
        .map(|(i, &p)| p * f(i))
        .sum()
}

fn cross_entropy_rate(rho: &CategoricalSource, mu: &CategoricalSource) -> f64 {
    let lm = mu.log_probs();
    expect(rho, |i| -lm[i])
}

fn cross_varentropy_rate(rho: &CategoricalSource, mu: &CategoricalSource) -> f64 {
    let lm = mu.log_probs();
    let mean = cross_entropy_rate(rho, mu);
    expect(rho, |i| {
        let d = -lm[i] - mean;
        d * d
    })
}

fn relative_entropy_rate(rho: &CategoricalSource, mu: &CategoricalSource) -> f64 {
    let lr = rho.log_probs();
    let lm = mu.log_probs();
    expect(rho, |i| lr[i] - lm[i]).max(0.0)
}

/// `log 1/μⁿ(x)`.
pub fn information(mu: &CategoricalSource, word: &[usize]) -> Result<f64, SourceError> {
    Ok(-mu.string_log_prob(word)?)
}

pub fn entropy(mu: &CategoricalSource, n: usize) -> f64 {
    n as f64 * cross_entropy_rate(mu, mu)
}

pub fn varentropy(mu: &CategoricalSource, n: usize) -> f64 {
    n as f64 * cross_varentropy_rate(mu, mu)
}

pub fn cross_entropy(rho: &CategoricalSource, mu: &CategoricalSource, n: usize) -> Result<f64, MeasureError> {
    check_alphabets(rho, mu)?;
    Ok(n as f64 * cross_entropy_rate(rho, mu))
}

pub fn cross_varentropy(rho: &CategoricalSource, mu: &CategoricalSource, n: usize) -> Result<f64, MeasureError> {
    check_alphabets(rho, mu)?;
    Ok(n as f64 * cross_varentropy_rate(rho, mu))
}

pub fn relative_entropy(rho: &CategoricalSource, mu: &CategoricalSource, n: usize) -> Result<f64, MeasureError> {
    check_alphabets(rho, mu)?;
    Ok(n as f64 * relative_entropy_rate(rho, mu))
}

/// Rényi entropy of order `alpha`; within [`RENYI_SHANNON_BAND`] of 1 the
/// Shannon entropy is returned.
pub fn renyi_entropy(mu: &CategoricalSource, alpha: f64, n: usize) -> f64 {
    if (1.0 - alpha).abs() < RENYI_SHANNON_BAND {
        return entropy(mu, n);
    }
    n as f64 / (1.0 - alpha) * log_power_sum(mu, alpha)
}

/// `log Σ θᵢ^α`. Near `α = 1` the sum is written as `1 + Σ θᵢ (θᵢ^{α−1} − 1)`
/// so that the small result keeps its relative accuracy.
fn log_power_sum(mu: &CategoricalSource, alpha: f64) -> f64 {
    let d = alpha - 1.0;
    if d.abs() < 0.5 {
        let s: f64 = mu
            .probs()
            .iter()
            .zip(mu.log_probs())
            .map(|(p, l)| p * (d * l).exp_m1())
            .sum();
        return s.ln_1p();
    }
    let lw: Vec<f64> = mu.log_probs().iter().map(|l| alpha * l).collect();
    log_sum_exp(&lw)
}

/// Measures of a pair `(rho, mu)` at string length `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureBundle {
    pub n: usize,
    pub entropy: f64,
    pub varentropy: f64,
    pub cross_entropy: f64,
    pub cross_varentropy: f64,
    pub relative_entropy: f64,
}

impl MeasureBundle {
    pub fn new(rho: &CategoricalSource, mu: &CategoricalSource, n: usize) -> Result<Self, MeasureError> {
        check_alphabets(rho, mu)?;
        Ok(Self {
            n,
            entropy: entropy(rho, n),
            varentropy: varentropy(rho, n),
            cross_entropy: n as f64 * cross_entropy_rate(rho, mu),
            cross_varentropy: n as f64 * cross_varentropy_rate(rho, mu),
            relative_entropy: n as f64 * relative_entropy_rate(rho, mu),
        })
    }

    /// Bundle of the tilt `T(μ, α)` measured against `μ`.
    pub fn of_tilt(mu: &CategoricalSource, alpha: f64, n: usize) -> Self {
        Self::new(&mu.tilt(alpha), mu, n).expect("a tilt shares its alphabet")
    }
}

/// The tilt identities as residuals (left side minus right side), for checking.
pub mod identities {
    use super::*;

    /// `tilt(tilt(μ,a),b) − tilt(μ,ab)`, largest componentwise magnitude.
    pub fn tilt_composition(mu: &CategoricalSource, a: f64, b: f64) -> f64 {
        let lhs = mu.tilt(a).tilt(b);
        let rhs = mu.tilt(a * b);
        lhs.probs()
            .iter()
            .zip(rhs.probs())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }

    /// The two Rényi identities at order `alpha ≠ 1`:
    /// `H(T‖μ) − H_α(μ) = D(T‖μ)/(1−α)` and `H(T) − H_α(μ) = α/(1−α) D(T‖μ)`.
    pub fn renyi(mu: &CategoricalSource, alpha: f64, n: usize) -> (f64, f64) {
        let t = mu.tilt(alpha);
        let b = MeasureBundle::new(&t, mu, n).expect("same alphabet");
        let h_alpha = renyi_entropy(mu, alpha, n);
        let first = b.cross_entropy - h_alpha - b.relative_entropy / (1.0 - alpha);
        let second = b.entropy - h_alpha - alpha / (1.0 - alpha) * b.relative_entropy;
        (first, second)
    }

    /// `log(1/τᵢ) − H(T) − α (log(1/θᵢ) − H(T‖μ))`, largest magnitude over symbols.
    pub fn tilt_mean(mu: &CategoricalSource, alpha: f64) -> f64 {
        let t = mu.tilt(alpha);
        let h_t = entropy(&t, 1);
        let ce = cross_entropy_rate(&t, mu);
        t.log_probs()
            .iter()
            .zip(mu.log_probs())
            .map(|(lt, lm)| (-lt - h_t - alpha * (-lm - ce)).abs())
            .fold(0.0, f64::max)
    }

    /// `α² V(T‖μ) − V(T)`.
    pub fn varentropy_scaling(mu: &CategoricalSource, alpha: f64, n: usize) -> f64 {
        let b = MeasureBundle::of_tilt(mu, alpha, n);
        alpha * alpha * b.cross_varentropy - b.varentropy
    }

    /// A finite-difference derivative next to its closed form.
    #[derive(Debug, Clone, Copy, PartialEq, Serialize)]
    pub struct DerivativePair {
        pub finite_difference: f64,
        pub closed_form: f64,
    }

    impl DerivativePair {
        pub fn relative_error(&self) -> f64 {
            let scale = self.closed_form.abs().max(f64::MIN_POSITIVE);
            (self.finite_difference - self.closed_form).abs() / scale
        }
    }

    fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (f(x + h) - f(x - h)) / (2.0 * h)
    }

    /// d/dα H(T(μ,α)) = −α V(T‖μ).
    pub fn entropy_slope(mu: &CategoricalSource, alpha: f64, n: usize, h: f64) -> DerivativePair {
        DerivativePair {
            finite_difference: central(|a| entropy(&mu.tilt(a), n), alpha, h),
            closed_form: -alpha * MeasureBundle::of_tilt(mu, alpha, n).cross_varentropy,
        }
    }

    /// d/dα H(T‖μ) = −V(T‖μ).
    pub fn cross_entropy_slope(mu: &CategoricalSource, alpha: f64, n: usize, h: f64) -> DerivativePair {
        DerivativePair {
            finite_difference: central(|a| MeasureBundle::of_tilt(mu, a, n).cross_entropy, alpha, h),
            closed_form: -MeasureBundle::of_tilt(mu, alpha, n).cross_varentropy,
        }
    }

    /// d/dα D(T‖μ) = (α − 1) V(T‖μ).
    pub fn relative_entropy_slope(mu: &CategoricalSource, alpha: f64, n: usize, h: f64) -> DerivativePair {
        DerivativePair {
            finite_difference: central(|a| MeasureBundle::of_tilt(mu, a, n).relative_entropy, alpha, h),
            closed_form: (alpha - 1.0) * MeasureBundle::of_tilt(mu, alpha, n).cross_varentropy,
        }
    }

    /// d/dα H_α(μ) = −D(T‖μ)/(1−α)², with the value −V(μ)/2 at α = 1.
    pub fn renyi_slope(mu: &CategoricalSource, alpha: f64, n: usize, h: f64) -> DerivativePair {
        let closed_form = if (1.0 - alpha).abs() < RENYI_SHANNON_BAND {
            -0.5 * varentropy(mu, n)
        } else {
            let d = MeasureBundle::of_tilt(mu, alpha, n).relative_entropy;
            -d / ((1.0 - alpha) * (1.0 - alpha))
        };
        DerivativePair {
            finite_difference: central(|a| renyi_entropy(mu, a, n), alpha, h),
            closed_form,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::identities::*;
    use super::*;
    use crate::source::Alphabet;
    use approx::assert_abs_diff_eq;

    fn s2() -> CategoricalSource {
        CategoricalSource::with_letters(&[0.2, 0.8]).unwrap()
    }
    fn s3() -> CategoricalSource {
        CategoricalSource::with_letters(&[0.2, 0.3, 0.5]).unwrap()
    }
    fn uniform(k: usize) -> CategoricalSource {
        CategoricalSource::uniform(Alphabet::letters(k).unwrap())
    }

    #[test]
    fn information_examples() {
        let s = s2();
        assert_abs_diff_eq!(information(&s, &[1]).unwrap(), 0.2231436, epsilon = 1e-7);
        assert_abs_diff_eq!(information(&s, &[0, 0]).unwrap(), 2.0 * 5f64.ln(), epsilon = 1e-14);
        assert_abs_diff_eq!(
            information(&uniform(2), &[0, 1, 1, 0, 1]).unwrap(),
            5.0 * 2f64.ln(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&uniform(3), 1), 3f64.ln(), epsilon = 1e-15);
        let h3 = -(0.2 * 0.2f64.ln() + 0.3 * 0.3f64.ln() + 0.5 * 0.5f64.ln());
        assert_abs_diff_eq!(entropy(&s3(), 1), h3, epsilon = 1e-15);
        assert_abs_diff_eq!(entropy(&s3(), 1), 1.0296530, epsilon = 1e-7);
        assert_abs_diff_eq!(entropy(&s2(), 8), 4.0032194, epsilon = 1e-7);
    }

    #[test]
    fn varentropy_examples() {
        assert_abs_diff_eq!(varentropy(&uniform(4), 7), 0.0, epsilon = 1e-15);
        // two-point variance: p(1-p)(log 4)^2
        assert_abs_diff_eq!(varentropy(&s2(), 1), 0.16 * 4f64.ln().powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(varentropy(&s2(), 1), 0.3074899, epsilon = 1e-7);
        assert_abs_diff_eq!(varentropy(&s3(), 1), 0.1329644, epsilon = 1e-7);
    }

    #[test]
    fn cross_entropy_examples() {
        let s = s2();
        assert_eq!(cross_entropy(&s, &s, 3).unwrap(), entropy(&s, 3));
        let ce = cross_entropy(&uniform(2), &s, 1).unwrap();
        assert_abs_diff_eq!(ce, 0.5 * (5f64.ln() + 1.25f64.ln()), epsilon = 1e-15);
        let ce = cross_entropy(&s.tilt(2.0), &s, 1).unwrap();
        assert_abs_diff_eq!(ce, 5f64.ln() / 17.0 + 16.0 * 1.25f64.ln() / 17.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ce, 0.3046903, epsilon = 1e-7);
        assert_eq!(cross_entropy(&s, &s3(), 1), Err(MeasureError::AlphabetMismatch));
    }

    #[test]
    fn cross_varentropy_examples() {
        let s = s2();
        assert_eq!(cross_varentropy(&s, &s, 2).unwrap(), varentropy(&s, 2));
        let cv = cross_varentropy(&uniform(2), &s, 1).unwrap();
        assert_abs_diff_eq!(cv, 0.25 * (5f64.ln() - 1.25f64.ln()).powi(2), epsilon = 1e-15);
        assert_abs_diff_eq!(cv, 0.4804530, epsilon = 1e-7);
        let t = s.tilt(2.0);
        let cv = cross_varentropy(&t, &s, 1).unwrap();
        assert_abs_diff_eq!(cv, varentropy(&t, 1) / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn relative_entropy_examples() {
        let s = s2();
        assert_eq!(relative_entropy(&s, &s, 5).unwrap(), 0.0);
        assert_abs_diff_eq!(
            relative_entropy(&uniform(2), &s, 1).unwrap(),
            0.5 * (0.25f64 / 0.16).ln(),
            epsilon = 1e-15
        );
        let t = s.tilt(2.0);
        let d = relative_entropy(&t, &s, 1).unwrap();
        assert_abs_diff_eq!(d, cross_entropy(&t, &s, 1).unwrap() - entropy(&t, 1), epsilon = 1e-15);
        assert_abs_diff_eq!(d, 0.0809722, epsilon = 1e-7);
    }

    #[test]
    fn renyi_examples() {
        for alpha in [-2.0, 0.0, 0.5, 3.0] {
            assert_abs_diff_eq!(renyi_entropy(&uniform(5), alpha, 3), 3.0 * 5f64.ln(), epsilon = 1e-13);
        }
        assert_abs_diff_eq!(renyi_entropy(&s2(), 2.0, 1), -0.68f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(renyi_entropy(&s3(), 2.0, 1), -0.38f64.ln(), epsilon = 1e-15);
        assert_eq!(renyi_entropy(&s3(), 1.0, 2), entropy(&s3(), 2));
        // continuity across the Shannon band
        assert_abs_diff_eq!(renyi_entropy(&s3(), 1.0 + 1e-7, 1), entropy(&s3(), 1), epsilon = 1e-7);
    }

    #[test]
    fn bundle_chain_rule() {
        for alpha in [-3.0, -0.5, 0.5, 2.0] {
            let b = MeasureBundle::of_tilt(&s3(), alpha, 4);
            assert_abs_diff_eq!(b.cross_entropy, b.entropy + b.relative_entropy, epsilon = 1e-10);
            assert!(b.entropy >= 0.0 && b.varentropy >= 0.0 && b.relative_entropy >= 0.0);
        }
    }

    #[test]
    fn identities_on_grid() {
        for mu in [s2(), s3()] {
            for alpha in [-3.0, -1.0, -0.5, 0.5, 2.0, 3.0] {
                let (r1, r2) = renyi(&mu, alpha, 4);
                assert!(r1.abs() < 1e-10 && r2.abs() < 1e-10);
                assert!(tilt_mean(&mu, alpha) < 1e-10);
                assert!(varentropy_scaling(&mu, alpha, 4).abs() < 1e-10);
                assert!(tilt_composition(&mu, alpha, 1.5) < 1e-12);
            }
        }
    }

    #[test]
    fn derivative_checks() {
        let mu = s3();
        for alpha in [-2.0, -0.5, 0.5, 2.0] {
            for pair in [
                entropy_slope(&mu, alpha, 4, 1e-5),
                cross_entropy_slope(&mu, alpha, 4, 1e-5),
                relative_entropy_slope(&mu, alpha, 4, 1e-5),
                renyi_slope(&mu, alpha, 4, 1e-5),
            ] {
                assert!(pair.relative_error() < 1e-5, "{pair:?}");
            }
        }
        let at_one = renyi_slope(&mu, 1.0, 4, 1e-5);
        assert_abs_diff_eq!(at_one.finite_difference, -0.5 * varentropy(&mu, 4), epsilon = 1e-5);
    }

    #[test]
    fn limits() {
        let mu = s3();
        let near_zero = cross_varentropy(&mu.tilt(1e-6), &mu, 1).unwrap();
        let at_uniform = cross_varentropy(&uniform(3), &mu, 1).unwrap();
        assert!((near_zero - at_uniform).abs() < 1e-4);
        assert!(entropy(&mu.tilt(200.0), 1) < 1e-3);
        assert!(entropy(&mu.tilt(-200.0), 1) < 1e-3);
    }

    #[test]
    fn renyi_decreasing_in_order() {
        let mu = s3();
        let grid: Vec<f64> = (-40..=40).map(|i| i as f64 * 0.1).collect();
        for w in grid.windows(2) {
            assert!(renyi_entropy(&mu, w[1], 1) < renyi_entropy(&mu, w[0], 1));
        }
    }

    #[test]
    fn renyi_is_continuous_through_order_one() {
        for mu in [s2(), s3()] {
            let h = entropy(&mu, 4);
            for d in [1e-8, 1e-6, 1e-4] {
                assert!((renyi_entropy(&mu, 1.0 + d, 4) - h).abs() < 10.0 * d);
                assert!((renyi_entropy(&mu, 1.0 - d, 4) - h).abs() < 10.0 * d);
            }
            // both evaluation routes agree where they meet
            let lw: Vec<f64> = mu.log_probs().iter().map(|l| 1.5 * l).collect();
            assert!((renyi_entropy(&mu, 1.4999999999, 1) - log_sum_exp(&lw) / -0.5).abs() < 1e-8);
        }
    }
}
