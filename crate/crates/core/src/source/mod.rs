//! String-sources: the memoryless categorical source the tilt acts on, plus
//! Markov and hidden-Markov sources that only expose word probabilities.

mod categorical;
mod chain;
mod file;

pub use categorical::{tilted_family_sample, CategoricalSource};
pub use chain::{HiddenMarkovSource, InitialDistribution, MarkovSource};
pub use file::{InitialSpec, SourceFile};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Absolute floor for a probability to count as strictly positive, and the
/// minimum gap separating the unique extreme from the runner-up.
pub const ASSUMPTION_TOLERANCE: f64 = 1e-12;

/// Slack within which probability vectors are re-normalized instead of rejected.
pub const NORMALIZATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extreme {
    Minimum,
    Maximum,
}

impl std::fmt::Display for Extreme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Extreme::Minimum => f.write_str("minimum"),
            Extreme::Maximum => f.write_str("maximum"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SourceError {
    #[error("alphabet needs at least 2 symbols, got {0}")]
    AlphabetTooSmall(usize),
    #[error("duplicate alphabet symbol {0:?}")]
    DuplicateSymbol(String),
    #[error("empty alphabet symbol")]
    EmptySymbol,
    #[error("{what}: expected length {expected}, found {found}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{what}: entry {index} is not a finite non-negative probability ({value})")]
    InvalidProbability {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("{what}: probabilities sum to {sum}, outside the re-normalization slack")]
    NotNormalized { what: &'static str, sum: f64 },
    #[error("assumption 1 violated: probability of symbol {index} is {value}, not strictly positive")]
    BoundaryViolation { index: usize, value: f64 },
    #[error("assumption 2 violated: the {extreme} probability is not attained by a unique symbol")]
    TieViolation { extreme: Extreme },
    #[error("unknown symbol {0:?}")]
    UnknownSymbol(String),
    #[error("strings must have length at least 1")]
    EmptyString,
    #[error("stationary distribution could not be solved: {0}")]
    Stationary(String),
    #[error("invalid source file: {0}")]
    InvalidFile(String),
}

/// Ordered finite alphabet. Symbol order defines lexicographic order on strings.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self, SourceError> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.len() < 2 {
            return Err(SourceError::AlphabetTooSmall(symbols.len()));
        }
        for (i, s) in symbols.iter().enumerate() {
            if s.is_empty() {
                return Err(SourceError::EmptySymbol);
            }
            if symbols[..i].contains(s) {
                return Err(SourceError::DuplicateSymbol(s.clone()));
            }
        }
        Ok(Self { symbols })
    }

    /// `a`, `b`, `c`, ... for `size ≤ 26`, then `s26`, `s27`, ...
    pub fn letters(size: usize) -> Result<Self, SourceError> {
        Self::new((0..size).map(|i| {
            if i < 26 {
                char::from(b'a' + i as u8).to_string()
            } else {
                format!("s{i}")
            }
        }))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }

    fn is_compact(&self) -> bool {
        self.symbols.iter().all(|s| s.chars().count() == 1)
    }

    /// Parses a string into symbol indices. Single-character alphabets read the
    /// text character by character; otherwise symbols are whitespace separated.
    pub fn encode(&self, text: &str) -> Result<Vec<usize>, SourceError> {
        let tokens: Vec<String> = if self.is_compact() {
            text.chars().filter(|c| !c.is_whitespace()).map(String::from).collect()
        } else {
            text.split_whitespace().map(String::from).collect()
        };
        if tokens.is_empty() {
            return Err(SourceError::EmptyString);
        }
        tokens
            .iter()
            .map(|t| self.index_of(t).ok_or_else(|| SourceError::UnknownSymbol(t.clone())))
            .collect()
    }

    pub fn render(&self, word: &[usize]) -> String {
        let sep = if self.is_compact() { "" } else { " " };
        word.iter()
            .map(|&i| self.symbols[i].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub(crate) fn check_word(&self, word: &[usize]) -> Result<(), SourceError> {
        if word.is_empty() {
            return Err(SourceError::EmptyString);
        }
        match word.iter().find(|&&i| i >= self.len()) {
            Some(&bad) => Err(SourceError::UnknownSymbol(format!("#{bad}"))),
            None => Ok(()),
        }
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = SourceError;
    fn try_from(value: Vec<String>) -> Result<Self, Self::Error> {
        Alphabet::new(value)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.symbols
    }
}

/// Checks a probability vector and re-normalizes it when the sum is within slack.
pub(crate) fn normalized(what: &'static str, probs: &[f64]) -> Result<Vec<f64>, SourceError> {
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() || value < 0.0 {
            return Err(SourceError::InvalidProbability { what, index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_SLACK {
        return Err(SourceError::NotNormalized { what, sum });
    }
    Ok(probs.iter().map(|p| p / sum).collect())
}

/// Any supported string-source.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceSource {
    Categorical(CategoricalSource),
    Markov(MarkovSource),
    Hidden(HiddenMarkovSource),
}

impl SequenceSource {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            SequenceSource::Categorical(s) => s.alphabet(),
            SequenceSource::Markov(s) => s.alphabet(),
            SequenceSource::Hidden(s) => s.alphabet(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SequenceSource::Categorical(_) => "categorical",
            SequenceSource::Markov(_) => "markov",
            SequenceSource::Hidden(_) => "hmm",
        }
    }

    pub fn as_categorical(&self) -> Option<&CategoricalSource> {
        match self {
            SequenceSource::Categorical(s) => Some(s),
            _ => None,
        }
    }

    /// How the initial distribution was fixed; `None` for memoryless sources.
    pub fn initial_distribution(&self) -> Option<InitialDistribution> {
        match self {
            SequenceSource::Categorical(_) => None,
            SequenceSource::Markov(s) => Some(s.initial_kind()),
            SequenceSource::Hidden(s) => Some(s.initial_kind()),
        }
    }

    /// Exact `log μⁿ(x)` in nats.
    pub fn string_log_prob(&self, word: &[usize]) -> Result<f64, SourceError> {
        self.alphabet().check_word(word)?;
        Ok(self.log_prob_unchecked(word))
    }

    pub fn string_log_prob_str(&self, text: &str) -> Result<f64, SourceError> {
        let word = self.alphabet().encode(text)?;
        Ok(self.log_prob_unchecked(&word))
    }

    pub(crate) fn log_prob_unchecked(&self, word: &[usize]) -> f64 {
        match self {
            SequenceSource::Categorical(s) => s.log_prob_unchecked(word),
            SequenceSource::Markov(s) => s.log_prob_unchecked(word),
            SequenceSource::Hidden(s) => s.log_prob_unchecked(word),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, SourceError> {
        let file: SourceFile =
            serde_json::from_str(text).map_err(|e| SourceError::InvalidFile(e.to_string()))?;
        file.into_source()
    }
}

impl From<CategoricalSource> for SequenceSource {
    fn from(s: CategoricalSource) -> Self {
        SequenceSource::Categorical(s)
    }
}

impl From<MarkovSource> for SequenceSource {
    fn from(s: MarkovSource) -> Self {
        SequenceSource::Markov(s)
    }
}

impl From<HiddenMarkovSource> for SequenceSource {
    fn from(s: HiddenMarkovSource) -> Self {
        SequenceSource::Hidden(s)
    }
}
