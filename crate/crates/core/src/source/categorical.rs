use super::{normalized, Alphabet, Extreme, SourceError, ASSUMPTION_TOLERANCE};
use crate::numeric::normalize_log_weights;

/// Memoryless string-source: one categorical distribution over the alphabet,
/// drawn independently for every position.
///
/// Probabilities are kept together with their logarithms; tilts are computed
/// from the logs so that large `|α|` does not overflow.
#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalSource {
    alphabet: Alphabet,
    theta: Vec<f64>,
    log_theta: Vec<f64>,
}

impl CategoricalSource {
    /// Builds a source and checks both standing assumptions (full support and
    /// unique extremes).
    pub fn new(alphabet: Alphabet, probs: &[f64]) -> Result<Self, SourceError> {
        let s = Self::from_probs(alphabet, probs)?;
        s.validate()?;
        Ok(s)
    }

    /// Builds a source with structural checks only (length, range, normalization).
    /// Use [`validate`](Self::validate) to check the assumptions.
    pub fn from_probs(alphabet: Alphabet, probs: &[f64]) -> Result<Self, SourceError> {
        if probs.len() != alphabet.len() {
            return Err(SourceError::LengthMismatch {
                what: "probs",
                expected: alphabet.len(),
                found: probs.len(),
            });
        }
        let theta = normalized("probs", probs)?;
        let log_theta = theta.iter().map(|p| p.ln()).collect();
        Ok(Self {
            alphabet,
            theta,
            log_theta,
        })
    }

    /// Convenience constructor over the letter alphabet `a, b, c, ...`.
    pub fn with_letters(probs: &[f64]) -> Result<Self, SourceError> {
        Self::new(Alphabet::letters(probs.len())?, probs)
    }

    pub fn uniform(alphabet: Alphabet) -> Self {
        let k = alphabet.len();
        let p = 1.0 / k as f64;
        Self {
            alphabet,
            theta: vec![p; k],
            log_theta: vec![-(k as f64).ln(); k],
        }
    }

    pub(crate) fn from_log_probs_unchecked(alphabet: Alphabet, log_theta: Vec<f64>) -> Self {
        let theta = log_theta.iter().map(|l| l.exp()).collect();
        Self {
            alphabet,
            theta,
            log_theta,
        }
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn probs(&self) -> &[f64] {
        &self.theta
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_theta
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Smallest symbol probability.
    pub fn min_prob(&self) -> f64 {
        self.theta.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest symbol probability.
    pub fn max_prob(&self) -> f64 {
        self.theta.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Accepts iff every probability clears the positivity floor and both the
    /// smallest and the largest probability are attained by a single symbol.
    pub fn validate(&self) -> Result<(), SourceError> {
        for (index, &value) in self.theta.iter().enumerate() {
            if value <= ASSUMPTION_TOLERANCE {
                return Err(SourceError::BoundaryViolation { index, value });
            }
        }
        let mut sorted = self.theta.clone();
        sorted.sort_by(f64::total_cmp);
        let k = sorted.len();
        if sorted[1] - sorted[0] <= ASSUMPTION_TOLERANCE {
            return Err(SourceError::TieViolation {
                extreme: Extreme::Minimum,
            });
        }
        if sorted[k - 1] - sorted[k - 2] <= ASSUMPTION_TOLERANCE {
            return Err(SourceError::TieViolation {
                extreme: Extreme::Maximum,
            });
        }
        Ok(())
    }

    /// The tilt of order `alpha`: probabilities proportional to `θᵢ^α`.
    ///
    /// `alpha == 1` returns the source unchanged and `alpha == 0` the uniform
    /// source; every other order is normalized by log-sum-exp.
    pub fn tilt(&self, alpha: f64) -> CategoricalSource {
        if alpha == 1.0 {
            return self.clone();
        }
        if alpha == 0.0 {
            return Self::uniform(self.alphabet.clone());
        }
        let mut lw: Vec<f64> = self.log_theta.iter().map(|l| alpha * l).collect();
        normalize_log_weights(&mut lw);
        Self::from_log_probs_unchecked(self.alphabet.clone(), lw)
    }

    /// `log Σⱼ θⱼ^α`, the per-symbol log-normalizer of the tilt.
    pub fn log_partition(&self, alpha: f64) -> f64 {
        let lw: Vec<f64> = self.log_theta.iter().map(|l| alpha * l).collect();
        crate::numeric::log_sum_exp(&lw)
    }

    /// The reversed source, i.e. the tilt of order −1.
    pub fn reverse(&self) -> CategoricalSource {
        self.tilt(-1.0)
    }

    /// Symbol counts of a word, in alphabet order.
    pub fn type_counts(&self, word: &[usize]) -> Vec<u32> {
        let mut counts = vec![0u32; self.len()];
        for &s in word {
            counts[s] += 1;
        }
        counts
    }

    /// `Σᵢ cᵢ log θᵢ` accumulated in alphabet order, so every string of a
    /// type class gets a bit-identical value.
    pub fn log_prob_of_counts(&self, counts: &[u32]) -> f64 {
        let mut acc = 0.0;
        for (&c, &l) in counts.iter().zip(&self.log_theta) {
            if c > 0 {
                acc += c as f64 * l;
            }
        }
        acc
    }

    pub(crate) fn log_prob_unchecked(&self, word: &[usize]) -> f64 {
        self.log_prob_of_counts(&self.type_counts(word))
    }

    pub fn string_log_prob(&self, word: &[usize]) -> Result<f64, SourceError> {
        self.alphabet.check_word(word)?;
        Ok(self.log_prob_unchecked(word))
    }

    pub fn same_alphabet(&self, other: &CategoricalSource) -> bool {
        self.alphabet == other.alphabet
    }
}

/// One tilt per requested order, in order.
pub fn tilted_family_sample(source: &CategoricalSource, alphas: &[f64]) -> Vec<CategoricalSource> {
    alphas.iter().map(|&a| source.tilt(a)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn s2() -> CategoricalSource {
        CategoricalSource::with_letters(&[0.2, 0.8]).unwrap()
    }

    fn s3() -> CategoricalSource {
        CategoricalSource::with_letters(&[0.2, 0.3, 0.5]).unwrap()
    }

    #[test]
    fn validate_examples() {
        assert!(s2().validate().is_ok());
        let a = Alphabet::letters(2).unwrap();
        let tie = CategoricalSource::from_probs(a.clone(), &[0.5, 0.5]).unwrap();
        assert!(matches!(tie.validate(), Err(SourceError::TieViolation { .. })));
        let edge = CategoricalSource::from_probs(a.clone(), &[0.0, 1.0]).unwrap();
        assert!(matches!(
            edge.validate(),
            Err(SourceError::BoundaryViolation { index: 0, .. })
        ));
        assert!(matches!(
            CategoricalSource::new(a, &[0.3, 0.8]),
            Err(SourceError::NotNormalized { .. })
        ));
    }

    #[test]
    fn tie_on_non_binary_extremes() {
        let s = CategoricalSource::from_probs(Alphabet::letters(3).unwrap(), &[0.25, 0.25, 0.5]).unwrap();
        assert_eq!(
            s.validate(),
            Err(SourceError::TieViolation {
                extreme: Extreme::Minimum
            })
        );
        let s = CategoricalSource::from_probs(Alphabet::letters(3).unwrap(), &[0.2, 0.4, 0.4]).unwrap();
        assert_eq!(
            s.validate(),
            Err(SourceError::TieViolation {
                extreme: Extreme::Maximum
            })
        );
    }

    #[test]
    fn tilt_examples() {
        let s = s2();
        assert_eq!(s.tilt(1.0).probs(), s.probs());
        assert_eq!(s.tilt(0.0).probs(), &[0.5, 0.5]);
        let t = s.tilt(2.0);
        assert_abs_diff_eq!(t.probs()[0], 1.0 / 17.0, epsilon = 1e-15);
        assert_abs_diff_eq!(t.probs()[1], 16.0 / 17.0, epsilon = 1e-15);
    }

    #[test]
    fn reverse_examples() {
        let r = s2().reverse();
        assert_abs_diff_eq!(r.probs()[0], 0.8, epsilon = 1e-15);
        assert_abs_diff_eq!(r.probs()[1], 0.2, epsilon = 1e-15);

        let r = s3().reverse();
        // (5, 10/3, 2) / (31/3)
        let expect = [15.0 / 31.0, 10.0 / 31.0, 6.0 / 31.0];
        for (a, b) in r.probs().iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(r.probs()[0], 0.483871, epsilon = 1e-6);

        let u = CategoricalSource::uniform(Alphabet::letters(3).unwrap());
        for p in u.reverse().probs() {
            assert_abs_diff_eq!(*p, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn family_sample_examples() {
        let s = s3();
        let fam = tilted_family_sample(&s, &[1.0]);
        assert_eq!(fam[0], s);

        let fam = tilted_family_sample(&s, &[1e-9, 60.0]);
        for p in fam[0].probs() {
            assert_abs_diff_eq!(*p, 1.0 / 3.0, epsilon = 1e-9);
        }
        assert!(fam[1].probs()[2] > 1.0 - 1e-12);

        let fam = tilted_family_sample(&s, &[2.0]);
        let expect = [0.04 / 0.38, 0.09 / 0.38, 0.25 / 0.38];
        for (a, b) in fam[0].probs().iter().zip(expect) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        assert_abs_diff_eq!(fam[0].probs()[0], 0.105263, epsilon = 1e-6);
    }

    #[test]
    fn string_log_prob_iid() {
        let s = s2();
        let w = s.alphabet().encode("bb").unwrap();
        assert_abs_diff_eq!(s.string_log_prob(&w).unwrap(), 2.0 * 0.8f64.ln(), epsilon = 1e-15);
        assert_abs_diff_eq!(s.string_log_prob(&w).unwrap(), -0.4462871, epsilon = 1e-7);
        assert!(matches!(s.string_log_prob(&[0, 5]), Err(SourceError::UnknownSymbol(_))));
        assert_eq!(s.string_log_prob(&[]), Err(SourceError::EmptyString));
    }

    #[test]
    fn closure_under_nonzero_tilts() {
        for s in [s2(), s3()] {
            for i in -8..=8 {
                if i == 0 {
                    continue;
                }
                let alpha = i as f64 * 0.5;
                assert!(s.tilt(alpha).validate().is_ok(), "alpha {alpha}");
            }
        }
    }

    fn arb_source() -> impl Strategy<Value = CategoricalSource> {
        prop::collection::vec(0.05f64..1.0, 2..=6).prop_filter_map("needs unique extremes", |w| {
            let sum: f64 = w.iter().sum();
            let p: Vec<f64> = w.iter().map(|x| x / sum).collect();
            CategoricalSource::with_letters(&p).ok()
        })
    }

    fn argsort(p: &[f64]) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..p.len()).collect();
        idx.sort_by(|&i, &j| p[i].total_cmp(&p[j]));
        idx
    }

    proptest! {
        #[test]
        fn tilt_composition(s in arb_source(), a in -4.0f64..4.0, b in -4.0f64..4.0) {
            let lhs = s.tilt(a).tilt(b);
            let rhs = s.tilt(a * b);
            for (x, y) in lhs.probs().iter().zip(rhs.probs()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn reverse_is_involution(s in arb_source()) {
            let rr = s.reverse().reverse();
            for (x, y) in rr.probs().iter().zip(s.probs()) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn tilt_preserves_or_reverses_order(s in arb_source(), a in 0.05f64..6.0) {
            let base = argsort(s.probs());
            prop_assert_eq!(argsort(s.tilt(a).probs()), base.clone());
            let mut rev = base;
            rev.reverse();
            prop_assert_eq!(argsort(s.tilt(-a).probs()), rev);
        }

        #[test]
        fn iid_log_prob_depends_on_type_only(
            s in arb_source(),
            word in prop::collection::vec(0usize..2, 1..12),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = word.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = s.string_log_prob(&word).unwrap();
            let b = s.string_log_prob(&shuffled).unwrap();
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
