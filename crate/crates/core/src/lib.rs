//! Tilted families of discrete sources, guesswork rank tables, typical-set
//! bound checks, large-deviation rate functions and closed-form guesswork
//! approximations.

pub mod approx;
pub mod cli;
pub mod guesswork;
pub mod measures;
pub mod numeric;
pub mod rate;
pub mod report;
pub mod shipped;
pub mod source;
pub mod verify;

pub use guesswork::{build_rank_table, GuessworkError, RankTable};
pub use measures::{MeasureBundle, MeasureError};
pub use rate::{RateError, RateKind};
pub use source::{Alphabet, CategoricalSource, SequenceSource, SourceError};
