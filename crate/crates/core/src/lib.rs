//! Classifies arguments into fourteen persuasion tactics from the shape of
//! their constituency parses alone.
//!
//! Trees are read from bracketed text, stripped of words, collapsed along
//! unary chains and linearized into [`ParseString`]s. Each tactic gets a
//! prototype string (a set median, or a concatenation of per-segment set
//! medians) and arguments go to the nearest prototype under normalized
//! token edit distance, optionally rejecting anything too far from all of
//! them.

pub mod classifier;
pub mod cli;
pub mod editdist;
mod error;
pub mod eval;
pub mod prototype;
pub mod tactic;
pub mod treebank;

pub use classifier::{
    classify, classify_batch, classify_with_rejection, Classification, Classifier,
};
pub use editdist::{edit_distance, normalized_distance, similarity, EditCosts};
pub use error::{Error, Result};
pub use eval::{evaluate, MetricsReport};
pub use prototype::{build_prototypes, BuildConfig, Method, PrototypeSet};
pub use tactic::{Category, LabeledArgument, TacticId, TacticNames};
pub use treebank::{ParseString, RawTree, Token};
