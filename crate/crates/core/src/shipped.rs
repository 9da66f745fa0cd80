//! Source descriptions shipped with the crate under `specs/`.

use crate::source::{CategoricalSource, SequenceSource};

pub const S2_JSON: &str = include_str!("../specs/s2.json");
pub const S3_JSON: &str = include_str!("../specs/s3.json");
pub const S3_MARKOV_JSON: &str = include_str!("../specs/s3_markov.json");
pub const S3_HMM_JSON: &str = include_str!("../specs/s3_hmm.json");
pub const S77_SAMPLE_JSON: &str = include_str!("../specs/s77_sample.json");

/// `(name, json)` for every shipped file.
pub const ALL: [(&str, &str); 5] = [
    ("s2", S2_JSON),
    ("s3", S3_JSON),
    ("s3_markov", S3_MARKOV_JSON),
    ("s3_hmm", S3_HMM_JSON),
    ("s77_sample", S77_SAMPLE_JSON),
];

fn load(json: &str) -> SequenceSource {
    SequenceSource::from_json_str(json).expect("shipped source files are valid")
}

fn categorical(json: &str) -> CategoricalSource {
    load(json).as_categorical().expect("memoryless source").clone()
}

/// Binary source `(0.2, 0.8)` on `{a, b}`.
pub fn s2() -> CategoricalSource {
    categorical(S2_JSON)
}

/// Ternary source `(0.2, 0.3, 0.5)` on `{a, b, c}`.
pub fn s3() -> CategoricalSource {
    categorical(S3_JSON)
}

pub fn s3_markov() -> SequenceSource {
    load(S3_MARKOV_JSON)
}

pub fn s3_hmm() -> SequenceSource {
    load(S3_HMM_JSON)
}

/// Synthetic 77-symbol source with Zipf-like weights.
pub fn s77_sample() -> CategoricalSource {
    categorical(S77_SAMPLE_JSON)
}
