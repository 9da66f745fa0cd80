//! Exhaustive guesswork: every string of length `n` ranked from most to least
//! likely, with ties broken by lexicographic order under the alphabet order.

mod order;
mod typical;

pub use order::{order_equivalent, OrderEquivalence, OrderWitness, ORDER_FIT_TOLERANCE};
pub use typical::{
    bound_ledger, typical_set, typical_set_with_table, BoundCheck, BoundStatus, MemberSet, SetReport,
    TypicalSetSpec,
};

use std::ops::Range;

use rayon::prelude::*;
use thiserror::Error;

use crate::measures::MeasureError;
use crate::source::{Alphabet, SequenceSource, SourceError};

/// Default cap on the number of enumerated strings.
pub const DEFAULT_BUDGET: u64 = 1 << 24;

/// Relative (per symbol) log-probability gap below which two strings tie.
pub const TIE_TOLERANCE_PER_SYMBOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GuessworkError {
    #[error("enumerating {alphabet}^{n} strings exceeds the budget of {budget}")]
    BudgetExceeded { alphabet: usize, n: usize, budget: u64 },
    #[error("string {0:?} is not in the rank table")]
    UnknownString(String),
    #[error("invalid typical-set query: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// `|X|^n` if it fits within `budget` (and in memory indices), else an error.
pub fn enumeration_size(alphabet: usize, n: usize, budget: u64) -> Result<usize, GuessworkError> {
    let exceeded = || GuessworkError::BudgetExceeded { alphabet, n, budget };
    if n == 0 {
        return Err(GuessworkError::Source(SourceError::EmptyString));
    }
    let size = u32::try_from(n)
        .ok()
        .and_then(|e| (alphabet as u64).checked_pow(e))
        .ok_or_else(exceeded)?;
    if size > budget || size > u32::MAX as u64 {
        return Err(exceeded());
    }
    Ok(size as usize)
}

/// Digits of `code` in base `k`, most significant first. Code order is
/// lexicographic order of the strings.
pub fn decode(code: usize, k: usize, n: usize) -> Vec<usize> {
    let mut word = vec![0; n];
    let mut c = code;
    for slot in word.iter_mut().rev() {
        *slot = c % k;
        c /= k;
    }
    word
}

pub fn encode(word: &[usize], k: usize) -> usize {
    word.iter().fold(0, |acc, &s| acc * k + s)
}

/// Log-probabilities of every length-`n` string, indexed by code.
pub fn enumerate_log_probs(source: &SequenceSource, n: usize, budget: u64) -> Result<Vec<f64>, GuessworkError> {
    let k = source.alphabet().len();
    let size = enumeration_size(k, n, budget)?;
    Ok((0..size)
        .into_par_iter()
        .map(|code| source.log_prob_unchecked(&decode(code, k, n)))
        .collect())
}

fn tied(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() < tol
}

/// One row of the rank table.
#[derive(Debug, Clone, PartialEq)]
pub struct RankRecord {
    pub code: usize,
    pub log_prob: f64,
    pub guesswork: u64,
    pub reverse_guesswork: u64,
}

/// Optimal (G) and reverse (R) ranks of all strings of one length.
///
/// `R = |X|ⁿ + 1 − G`, so both are bijections onto `1..=|X|ⁿ`.
#[derive(Debug, Clone)]
pub struct RankTable {
    n: usize,
    alphabet: Alphabet,
    log_probs: Vec<f64>,
    rank_of: Vec<u32>,
    order: Vec<u32>,
}

/// Builds the full rank table. Sort key is `(−log-prob, code)`; strings whose
/// log-probabilities differ by less than `1e-12·n` are a tie class and are
/// ordered lexicographically.
pub fn build_rank_table(source: &SequenceSource, n: usize, budget: u64) -> Result<RankTable, GuessworkError> {
    let log_probs = enumerate_log_probs(source, n, budget)?;
    Ok(RankTable::from_log_probs(source.alphabet().clone(), n, log_probs))
}

impl RankTable {
    pub(crate) fn from_log_probs(alphabet: Alphabet, n: usize, log_probs: Vec<f64>) -> Self {
        let size = log_probs.len();
        let mut order: Vec<u32> = (0..size as u32).collect();
        order.par_sort_unstable_by(|&a, &b| {
            log_probs[b as usize]
                .total_cmp(&log_probs[a as usize])
                .then(a.cmp(&b))
        });
        let tol = TIE_TOLERANCE_PER_SYMBOL * n as f64;
        let mut start = 0;
        while start < size {
            let anchor = log_probs[order[start] as usize];
            let mut end = start + 1;
            while end < size && tied(anchor, log_probs[order[end] as usize], tol) {
                end += 1;
            }
            if end - start > 1 {
                order[start..end].sort_unstable();
            }
            start = end;
        }
        let mut rank_of = vec![0u32; size];
        for (pos, &code) in order.iter().enumerate() {
            rank_of[code as usize] = pos as u32 + 1;
        }
        Self {
            n,
            alphabet,
            log_probs,
            rank_of,
            order,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    /// Number of strings, `|X|ⁿ`.
    pub fn len(&self) -> usize {
        self.log_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_probs.is_empty()
    }

    pub fn log_probs(&self) -> &[f64] {
        &self.log_probs
    }

    pub fn log_prob(&self, code: usize) -> f64 {
        self.log_probs[code]
    }

    pub fn word(&self, code: usize) -> Vec<usize> {
        decode(code, self.alphabet.len(), self.n)
    }

    pub fn render(&self, code: usize) -> String {
        self.alphabet.render(&self.word(code))
    }

    pub fn code_of(&self, word: &[usize]) -> Result<usize, GuessworkError> {
        if word.len() != self.n || word.iter().any(|&s| s >= self.alphabet.len()) {
            return Err(GuessworkError::UnknownString(format!("{word:?}")));
        }
        Ok(encode(word, self.alphabet.len()))
    }

    pub fn code_of_str(&self, text: &str) -> Result<usize, GuessworkError> {
        let word = self
            .alphabet
            .encode(text)
            .map_err(|_| GuessworkError::UnknownString(text.to_string()))?;
        self.code_of(&word)
            .map_err(|_| GuessworkError::UnknownString(text.to_string()))
    }

    pub fn guesswork_of_code(&self, code: usize) -> u64 {
        self.rank_of[code] as u64
    }

    pub fn reverse_guesswork_of_code(&self, code: usize) -> u64 {
        self.len() as u64 + 1 - self.rank_of[code] as u64
    }

    /// Code of the string guessed at position `rank` (1-based).
    pub fn code_at_rank(&self, rank: u64) -> usize {
        self.order[(rank - 1) as usize] as usize
    }

    pub fn guesswork(&self, word: &[usize]) -> Result<u64, GuessworkError> {
        Ok(self.guesswork_of_code(self.code_of(word)?))
    }

    pub fn reverse_guesswork(&self, word: &[usize]) -> Result<u64, GuessworkError> {
        Ok(self.reverse_guesswork_of_code(self.code_of(word)?))
    }

    pub fn guesswork_str(&self, text: &str) -> Result<u64, GuessworkError> {
        Ok(self.guesswork_of_code(self.code_of_str(text)?))
    }

    pub fn reverse_guesswork_str(&self, text: &str) -> Result<u64, GuessworkError> {
        Ok(self.reverse_guesswork_of_code(self.code_of_str(text)?))
    }

    /// `log G` in nats.
    pub fn log_guesswork(&self, word: &[usize]) -> Result<f64, GuessworkError> {
        Ok((self.guesswork(word)? as f64).ln())
    }

    /// `log R` in nats.
    pub fn log_reverse_guesswork(&self, word: &[usize]) -> Result<f64, GuessworkError> {
        Ok((self.reverse_guesswork(word)? as f64).ln())
    }

    /// Records in rank order.
    pub fn records(&self) -> impl Iterator<Item = RankRecord> + '_ {
        self.order.iter().map(move |&c| {
            let code = c as usize;
            RankRecord {
                code,
                log_prob: self.log_probs[code],
                guesswork: self.guesswork_of_code(code),
                reverse_guesswork: self.reverse_guesswork_of_code(code),
            }
        })
    }

    /// `(k, μⁿ(string guessed k-th))` for every rank.
    pub fn guesswork_pmf(&self) -> Vec<(u64, f64)> {
        self.order
            .iter()
            .enumerate()
            .map(|(pos, &c)| (pos as u64 + 1, self.log_probs[c as usize].exp()))
            .collect()
    }

    /// Rank ranges (as 0-based positions) of the tie classes, in rank order.
    pub fn tie_classes(&self) -> Vec<Range<usize>> {
        let tol = TIE_TOLERANCE_PER_SYMBOL * self.n as f64;
        let mut out = Vec::new();
        let mut start = 0;
        while start < self.len() {
            let anchor = self.log_probs[self.order[start] as usize];
            let mut end = start + 1;
            while end < self.len() && tied(anchor, self.log_probs[self.order[end] as usize], tol) {
                end += 1;
            }
            out.push(start..end);
            start = end;
        }
        out
    }
}
