//! Nearest-prototype classification with an optional similarity floor.

use rayon::prelude::*;

use crate::editdist::Pattern;
use crate::error::{Error, Result};
use crate::prototype::PrototypeSet;
use crate::tactic::{Category, TacticId, TACTIC_COUNT};
use crate::treebank::ParseString;

pub const DEFAULT_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub decision: Category,
    /// Normalized distance to each prototype, indexed in tactic order.
    pub distances: [f64; TACTIC_COUNT],
    pub best_similarity: f64,
}

impl Classification {
    pub fn distance(&self, tactic: TacticId) -> f64 {
        self.distances[tactic.index()]
    }

    /// Tactic with the smallest distance, earliest in tactic order on ties.
    pub fn nearest(&self) -> TacticId {
        nearest(&self.distances)
    }
}

fn nearest(distances: &[f64; TACTIC_COUNT]) -> TacticId {
    let mut best = 0;
    for (i, &d) in distances.iter().enumerate().skip(1) {
        if d < distances[best] {
            best = i;
        }
    }
    TacticId::ALL[best]
}

pub fn check_threshold(threshold: f64) -> Result<()> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(Error::InvalidThreshold(threshold))
    }
}

/// A prototype set compiled for repeated distance queries.
#[derive(Debug, Clone)]
pub struct Classifier {
    patterns: Vec<Pattern>,
}

impl Classifier {
    pub fn new(protos: &PrototypeSet) -> Self {
        Classifier {
            patterns: protos
                .iter()
                .map(|(_, p)| Pattern::new(p.tokens()))
                .collect(),
        }
    }

    pub fn distances(&self, arg: &ParseString) -> [f64; TACTIC_COUNT] {
        let mut out = [0.0; TACTIC_COUNT];
        for (slot, pattern) in out.iter_mut().zip(&self.patterns) {
            let longest = pattern.len().max(arg.len());
            if longest > 0 {
                *slot = pattern.distance(arg.tokens()) as f64 / longest as f64;
            }
        }
        out
    }

    pub fn classify(&self, arg: &ParseString) -> Classification {
        let distances = self.distances(arg);
        let decision = nearest(&distances);
        Classification {
            decision: Category::Tactic(decision),
            best_similarity: 1.0 - distances[decision.index()],
            distances,
        }
    }

    /// Rejects `arg` as a non-argument when its similarity to every
    /// prototype is strictly below `threshold`.
    pub fn classify_with_rejection(
        &self,
        arg: &ParseString,
        threshold: f64,
    ) -> Result<Classification> {
        check_threshold(threshold)?;
        let mut result = self.classify(arg);
        if result.best_similarity < threshold {
            result.decision = Category::NonArgument;
        }
        Ok(result)
    }

    pub fn classify_batch(
        &self,
        args: &[ParseString],
        threshold: Option<f64>,
    ) -> Result<Vec<Classification>> {
        if let Some(t) = threshold {
            check_threshold(t)?;
        }
        args.par_iter()
            .enumerate()
            .map(|(i, arg)| match threshold {
                Some(t) => self.classify_with_rejection(arg, t).map_err(|e| e.at(i)),
                None => Ok(self.classify(arg)),
            })
            .collect()
    }
}

pub fn classify(arg: &ParseString, protos: &PrototypeSet) -> Classification {
    Classifier::new(protos).classify(arg)
}

pub fn classify_with_rejection(
    arg: &ParseString,
    protos: &PrototypeSet,
    threshold: f64,
) -> Result<Classification> {
    Classifier::new(protos).classify_with_rejection(arg, threshold)
}

pub fn classify_batch(
    args: &[ParseString],
    protos: &PrototypeSet,
    threshold: Option<f64>,
) -> Result<Vec<Classification>> {
    Classifier::new(protos).classify_batch(args, threshold)
}
