use serde::{Deserialize, Serialize};

use super::{Alphabet, CategoricalSource, HiddenMarkovSource, MarkovSource, SequenceSource, SourceError};

/// `"stationary"` or an explicit probability vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InitialSpec {
    Keyword(String),
    Vector(Vec<f64>),
}

impl Default for InitialSpec {
    fn default() -> Self {
        InitialSpec::Keyword("stationary".into())
    }
}

impl InitialSpec {
    fn resolve(&self) -> Result<Option<&[f64]>, SourceError> {
        match self {
            InitialSpec::Keyword(k) if k == "stationary" => Ok(None),
            InitialSpec::Keyword(k) => Err(SourceError::InvalidFile(format!(
                "unknown initial distribution keyword {k:?}"
            ))),
            InitialSpec::Vector(v) => Ok(Some(v)),
        }
    }
}

/// JSON source description, tagged by `"kind"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum SourceFile {
    Categorical {
        alphabet: Vec<String>,
        probs: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
    },
    Markov {
        alphabet: Vec<String>,
        transition: Vec<Vec<f64>>,
        #[serde(default)]
        initial: InitialSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
    },
    Hmm {
        states: usize,
        transition: Vec<Vec<f64>>,
        emission: Vec<Vec<f64>>,
        alphabet: Vec<String>,
        #[serde(default)]
        initial: InitialSpec,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        description: Option<String>,
    },
}

impl SourceFile {
    pub fn into_source(self) -> Result<SequenceSource, SourceError> {
        match self {
            SourceFile::Categorical { alphabet, probs, .. } => {
                Ok(CategoricalSource::new(Alphabet::new(alphabet)?, &probs)?.into())
            }
            SourceFile::Markov {
                alphabet,
                transition,
                initial,
                ..
            } => Ok(MarkovSource::new(Alphabet::new(alphabet)?, &transition, initial.resolve()?)?.into()),
            SourceFile::Hmm {
                states,
                transition,
                emission,
                alphabet,
                initial,
                ..
            } => Ok(HiddenMarkovSource::new(
                Alphabet::new(alphabet)?,
                states,
                &transition,
                &emission,
                initial.resolve()?,
            )?
            .into()),
        }
    }
}
