use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{normalized, Alphabet, SourceError};

/// Where the initial distribution of a chain came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitialDistribution {
    Stationary,
    Explicit,
}

impl std::fmt::Display for InitialDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialDistribution::Stationary => f.write_str("stationary"),
            InitialDistribution::Explicit => f.write_str("explicit"),
        }
    }
}

fn stochastic_matrix(
    what: &'static str,
    rows: &[Vec<f64>],
    n_rows: usize,
    n_cols: usize,
) -> Result<Vec<Vec<f64>>, SourceError> {
    if rows.len() != n_rows {
        return Err(SourceError::LengthMismatch {
            what,
            expected: n_rows,
            found: rows.len(),
        });
    }
    rows.iter()
        .map(|row| {
            if row.len() != n_cols {
                return Err(SourceError::LengthMismatch {
                    what,
                    expected: n_cols,
                    found: row.len(),
                });
            }
            normalized(what, row)
        })
        .collect()
}

/// Solves `π T = π`, `Σ π = 1` for a row-stochastic `T`.
pub(crate) fn stationary_distribution(transition: &[Vec<f64>]) -> Result<Vec<f64>, SourceError> {
    let k = transition.len();
    // Rows of (Tᵀ − I), with the last equation replaced by the normalization.
    let mut a = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            a[(i, j)] = transition[j][i] - if i == j { 1.0 } else { 0.0 };
        }
    }
    for j in 0..k {
        a[(k - 1, j)] = 1.0;
    }
    let mut b = DVector::<f64>::zeros(k);
    b[k - 1] = 1.0;
    let pi = a
        .lu()
        .solve(&b)
        .ok_or_else(|| SourceError::Stationary("singular system (chain not irreducible?)".into()))?;
    if pi.iter().any(|p| !p.is_finite() || *p < -1e-12) {
        return Err(SourceError::Stationary(format!("invalid solution {:?}", pi.as_slice())));
    }
    let clipped: Vec<f64> = pi.iter().map(|p| p.max(0.0)).collect();
    let sum: f64 = clipped.iter().sum();
    Ok(clipped.into_iter().map(|p| p / sum).collect())
}

fn resolve_initial(
    initial: Option<&[f64]>,
    transition: &[Vec<f64>],
) -> Result<(Vec<f64>, InitialDistribution), SourceError> {
    match initial {
        None => Ok((stationary_distribution(transition)?, InitialDistribution::Stationary)),
        Some(init) => {
            if init.len() != transition.len() {
                return Err(SourceError::LengthMismatch {
                    what: "initial",
                    expected: transition.len(),
                    found: init.len(),
                });
            }
            Ok((normalized("initial", init)?, InitialDistribution::Explicit))
        }
    }
}

/// First-order Markov source over the alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovSource {
    alphabet: Alphabet,
    transition: Vec<Vec<f64>>,
    initial: Vec<f64>,
    initial_kind: InitialDistribution,
    log_transition: Vec<Vec<f64>>,
    log_initial: Vec<f64>,
}

impl MarkovSource {
    /// `initial = None` selects the stationary distribution of the chain.
    pub fn new(
        alphabet: Alphabet,
        transition: &[Vec<f64>],
        initial: Option<&[f64]>,
    ) -> Result<Self, SourceError> {
        let k = alphabet.len();
        let transition = stochastic_matrix("transition", transition, k, k)?;
        let (initial, initial_kind) = resolve_initial(initial, &transition)?;
        let log_transition = transition
            .iter()
            .map(|r| r.iter().map(|p| p.ln()).collect())
            .collect();
        let log_initial = initial.iter().map(|p| p.ln()).collect();
        Ok(Self {
            alphabet,
            transition,
            initial,
            initial_kind,
            log_transition,
            log_initial,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn initial_kind(&self) -> InitialDistribution {
        self.initial_kind
    }

    pub(crate) fn log_prob_unchecked(&self, word: &[usize]) -> f64 {
        let mut acc = self.log_initial[word[0]];
        for pair in word.windows(2) {
            acc += self.log_transition[pair[0]][pair[1]];
        }
        acc
    }
}

/// Hidden Markov source: a hidden chain emitting one alphabet symbol per step.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenMarkovSource {
    alphabet: Alphabet,
    transition: Vec<Vec<f64>>,
    emission: Vec<Vec<f64>>,
    initial: Vec<f64>,
    initial_kind: InitialDistribution,
}

impl HiddenMarkovSource {
    /// `initial = None` selects the stationary distribution of the hidden chain.
    pub fn new(
        alphabet: Alphabet,
        states: usize,
        transition: &[Vec<f64>],
        emission: &[Vec<f64>],
        initial: Option<&[f64]>,
    ) -> Result<Self, SourceError> {
        if states == 0 {
            return Err(SourceError::InvalidFile("hidden state count must be positive".into()));
        }
        let transition = stochastic_matrix("transition", transition, states, states)?;
        let emission = stochastic_matrix("emission", emission, states, alphabet.len())?;
        let (initial, initial_kind) = resolve_initial(initial, &transition)?;
        Ok(Self {
            alphabet,
            transition,
            emission,
            initial,
            initial_kind,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn states(&self) -> usize {
        self.transition.len()
    }

    pub fn transition(&self) -> &[Vec<f64>] {
        &self.transition
    }

    pub fn emission(&self) -> &[Vec<f64>] {
        &self.emission
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    pub fn initial_kind(&self) -> InitialDistribution {
        self.initial_kind
    }

    /// Scaled forward recursion; the log-likelihood is the sum of the log
    /// scaling factors.
    pub(crate) fn log_prob_unchecked(&self, word: &[usize]) -> f64 {
        let s = self.states();
        let mut forward: Vec<f64> = (0..s)
            .map(|h| self.initial[h] * self.emission[h][word[0]])
            .collect();
        let mut log_lik = 0.0;
        let mut next = vec![0.0; s];
        for (step, &sym) in word.iter().enumerate() {
            if step > 0 {
                for (j, slot) in next.iter_mut().enumerate() {
                    let mut acc = 0.0;
                    for (i, f) in forward.iter().enumerate() {
                        acc += f * self.transition[i][j];
                    }
                    *slot = acc * self.emission[j][sym];
                }
                std::mem::swap(&mut forward, &mut next);
            }
            let scale: f64 = forward.iter().sum();
            if scale <= 0.0 {
                return f64::NEG_INFINITY;
            }
            log_lik += scale.ln();
            for f in forward.iter_mut() {
                *f /= scale;
            }
        }
        log_lik
    }
}
