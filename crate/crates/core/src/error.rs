use thiserror::Error;

use crate::prototype::TacticId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty input")]
    EmptyInput,
    #[error("malformed tree at byte {offset}: {reason}")]
    MalformedTree { offset: usize, reason: String },
    #[error("tree still carries the word {word:?} under {label}")]
    NotStripped { label: String, word: String },
    #[error("unbalanced token sequence at token {position}")]
    Unbalanced { position: usize },
    #[error("category has no arguments")]
    EmptyCategory,
    #[error("segment count must be at least 1")]
    InvalidSegmentCount,
    #[error("set fraction {0} outside (0, 1]")]
    InvalidFraction(f64),
    #[error("no arguments for tactic {0}")]
    MissingTactic(TacticId),
    #[error("unknown tactic name {0:?}")]
    UnknownTactic(String),
    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("nothing to evaluate")]
    EmptyEvaluation,
    #[error("sample size {size} exceeds corpus size {available}")]
    InvalidSampleSize { size: usize, available: usize },
    #[error("threshold sweep needs at least one non-argument in the corpus")]
    NoNonArguments,
    #[error("item {index}: {source}")]
    Item {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn malformed(offset: usize, reason: impl Into<String>) -> Self {
        Error::MalformedTree {
            offset,
            reason: reason.into(),
        }
    }

    pub(crate) fn at(self, index: usize) -> Self {
        Error::Item {
            index,
            source: Box::new(self),
        }
    }
}
