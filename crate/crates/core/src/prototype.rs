//! Per-tactic prototype strings: set medians and segment-wise synthesis.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::editdist::Pattern;
use crate::error::{Error, Result};
use crate::tactic::{Category, LabeledArgument, TACTIC_COUNT};
use crate::treebank::ParseString;

pub use crate::tactic::TacticId;

pub const DEFAULT_SET_FRACTION: f64 = 0.30;
pub const DEFAULT_SEGMENTS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Prototype is the set median of the sampled arguments.
    Median,
    /// Prototype is the concatenation of per-segment set medians.
    Synthetic,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Median => "median",
            Method::Synthetic => "synthetic",
        })
    }
}

/// Sum of unit-cost edit distances from each string to all the others.
pub fn distance_sums(strings: &[ParseString]) -> Vec<usize> {
    let mut sums = vec![0usize; strings.len()];
    for (i, a) in strings.iter().enumerate() {
        let pattern = Pattern::new(a.tokens());
        for (j, b) in strings.iter().enumerate().skip(i + 1) {
            let d = pattern.distance(b.tokens());
            sums[i] += d;
            sums[j] += d;
        }
    }
    sums
}

/// Index of the set median: smallest distance sum, then fewest tokens, then
/// the lexicographically smallest rendering.
pub fn set_median_index(strings: &[ParseString]) -> Result<usize> {
    if strings.is_empty() {
        return Err(Error::EmptyCategory);
    }
    let sums = distance_sums(strings);
    let mut best = 0;
    for i in 1..strings.len() {
        let ord = sums[i]
            .cmp(&sums[best])
            .then(strings[i].len().cmp(&strings[best].len()))
            .then_with(|| strings[i].to_string().cmp(&strings[best].to_string()));
        if ord == Ordering::Less {
            best = i;
        }
    }
    Ok(best)
}

pub fn set_median(strings: &[ParseString]) -> Result<ParseString> {
    set_median_index(strings).map(|i| strings[i].clone())
}

/// Cuts `ps` into `k` contiguous pieces. The first `n mod k` pieces get one
/// extra token; when `n < k` the trailing pieces are empty.
pub fn segment(ps: &ParseString, k: usize) -> Result<Vec<ParseString>> {
    if k == 0 {
        return Err(Error::InvalidSegmentCount);
    }
    let tokens = ps.tokens();
    let (base, extra) = (tokens.len() / k, tokens.len() % k);
    let mut start = 0;
    Ok((0..k)
        .map(|i| {
            let size = base + usize::from(i < extra);
            let piece = ParseString::new(tokens[start..start + size].to_vec());
            start += size;
            piece
        })
        .collect())
}

/// Concatenation of the set medians of the i-th segments, for i in 1..=k.
pub fn synthesize_prototype(strings: &[ParseString], k: usize) -> Result<ParseString> {
    if k == 0 {
        return Err(Error::InvalidSegmentCount);
    }
    if strings.is_empty() {
        return Err(Error::EmptyCategory);
    }
    let segmented = strings
        .iter()
        .map(|s| segment(s, k))
        .collect::<Result<Vec<_>>>()?;
    let mut out = ParseString::empty();
    for i in 0..k {
        let column: Vec<ParseString> = segmented.iter().map(|segs| segs[i].clone()).collect();
        out.append(&set_median(&column)?);
    }
    Ok(out)
}

fn check_fraction(fraction: f64) -> Result<()> {
    if fraction > 0.0 && fraction <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidFraction(fraction))
    }
}

/// Number of items a fraction selects: rounded half up, at least one.
pub fn sample_size(fraction: f64, available: usize) -> usize {
    ((fraction * available as f64).round() as usize).clamp(1, available.max(1))
}

/// Uniform sample without replacement, returned in input order.
pub fn sample_category<T: Clone>(
    items: &[T],
    fraction: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<T>> {
    check_fraction(fraction)?;
    if items.is_empty() {
        return Err(Error::EmptyCategory);
    }
    if fraction == 1.0 {
        return Ok(items.to_vec());
    }
    let count = sample_size(fraction, items.len());
    let mut picked = rand::seq::index::sample(rng, items.len(), count).into_vec();
    picked.sort_unstable();
    Ok(picked.into_iter().map(|i| items[i].clone()).collect())
}

/// Seeded convenience wrapper around [`sample_category`].
pub fn sample_with_seed<T: Clone>(items: &[T], fraction: f64, seed: u64) -> Result<Vec<T>> {
    sample_category(items, fraction, &mut ChaCha8Rng::seed_from_u64(seed))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildConfig {
    pub method: Method,
    pub set_fraction: f64,
    pub segments: usize,
    pub seed: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            method: Method::Synthetic,
            set_fraction: DEFAULT_SET_FRACTION,
            segments: DEFAULT_SEGMENTS,
            seed: 0,
        }
    }
}

/// One prototype per tactic plus how it was built.
///
/// Serializes to the prototype file layout; prototypes are stored as
/// rendered token text, so externally supplied strings can be dropped in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PrototypeFile", into = "PrototypeFile")]
pub struct PrototypeSet {
    prototypes: Vec<ParseString>,
    pub method: Method,
    pub set_fraction: f64,
    pub segments: Option<usize>,
    pub seed: u64,
    pub source_counts: BTreeMap<TacticId, usize>,
}

#[derive(Serialize, Deserialize)]
struct PrototypeFile {
    method: Method,
    set_fraction: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    segments: Option<usize>,
    seed: u64,
    prototypes: BTreeMap<TacticId, ParseString>,
    #[serde(default)]
    source_counts: BTreeMap<TacticId, usize>,
}

impl TryFrom<PrototypeFile> for PrototypeSet {
    type Error = Error;

    fn try_from(file: PrototypeFile) -> Result<Self> {
        check_fraction(file.set_fraction)?;
        if file.segments == Some(0) {
            return Err(Error::InvalidSegmentCount);
        }
        let mut set = PrototypeSet::from_map(file.prototypes)?;
        set.method = file.method;
        set.set_fraction = file.set_fraction;
        set.segments = file.segments;
        set.seed = file.seed;
        set.source_counts = file.source_counts;
        Ok(set)
    }
}

impl From<PrototypeSet> for PrototypeFile {
    fn from(set: PrototypeSet) -> Self {
        PrototypeFile {
            method: set.method,
            set_fraction: set.set_fraction,
            segments: set.segments,
            seed: set.seed,
            prototypes: TacticId::ALL.into_iter().zip(set.prototypes).collect(),
            source_counts: set.source_counts,
        }
    }
}

impl PrototypeSet {
    /// Wraps externally supplied prototypes. Provenance defaults to a median
    /// set over all arguments with seed 0 and no counts.
    pub fn from_map(mut prototypes: BTreeMap<TacticId, ParseString>) -> Result<Self> {
        let prototypes = TacticId::ALL
            .into_iter()
            .map(|t| prototypes.remove(&t).ok_or(Error::MissingTactic(t)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PrototypeSet {
            prototypes,
            method: Method::Median,
            set_fraction: 1.0,
            segments: None,
            seed: 0,
            source_counts: BTreeMap::new(),
        })
    }

    /// Prototypes listed in tactic order.
    pub fn from_ordered(prototypes: [ParseString; TACTIC_COUNT]) -> Self {
        PrototypeSet::from_map(TacticId::ALL.into_iter().zip(prototypes).collect())
            .expect("all tactics present")
    }

    pub fn get(&self, tactic: TacticId) -> &ParseString {
        &self.prototypes[tactic.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (TacticId, &ParseString)> + '_ {
        TacticId::ALL.into_iter().zip(&self.prototypes)
    }

    /// Pairs of tactics whose prototypes are identical token sequences.
    /// Self-classification ties between them are unavoidable.
    pub fn duplicates(&self) -> Vec<(TacticId, TacticId)> {
        let mut out = Vec::new();
        for (i, a) in self.prototypes.iter().enumerate() {
            for (j, b) in self.prototypes.iter().enumerate().skip(i + 1) {
                if a == b {
                    out.push((TacticId::ALL[i], TacticId::ALL[j]));
                }
            }
        }
        out
    }
}

/// Builds one prototype per tactic from the tactic-labelled arguments of
/// `corpus`; non-argument records are ignored.
///
/// Each tactic draws its sample from its own ChaCha stream of `seed`, so the
/// result does not depend on how the per-tactic work is scheduled.
pub fn build_prototypes(corpus: &[LabeledArgument], config: &BuildConfig) -> Result<PrototypeSet> {
    check_fraction(config.set_fraction)?;
    if config.method == Method::Synthetic && config.segments == 0 {
        return Err(Error::InvalidSegmentCount);
    }
    let mut grouped: Vec<Vec<ParseString>> = vec![Vec::new(); TACTIC_COUNT];
    for arg in corpus {
        if let Category::Tactic(t) = arg.gold {
            grouped[t.index()].push(arg.parse.clone());
        }
    }
    if let Some(missing) = TacticId::ALL
        .into_iter()
        .find(|t| grouped[t.index()].is_empty())
    {
        return Err(Error::MissingTactic(missing));
    }

    let built = TacticId::ALL
        .par_iter()
        .map(|&tactic| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(tactic.index() as u64);
            let sample = sample_category(&grouped[tactic.index()], config.set_fraction, &mut rng)?;
            let prototype = match config.method {
                Method::Median => set_median(&sample)?,
                Method::Synthetic => synthesize_prototype(&sample, config.segments)?,
            };
            Ok((prototype, sample.len()))
        })
        .collect::<Result<Vec<_>>>()?;

    let source_counts = TacticId::ALL
        .into_iter()
        .zip(built.iter().map(|(_, n)| *n))
        .collect();
    Ok(PrototypeSet {
        prototypes: built.into_iter().map(|(p, _)| p).collect(),
        method: config.method,
        set_fraction: config.set_fraction,
        segments: (config.method == Method::Synthetic).then_some(config.segments),
        seed: config.seed,
        source_counts,
    })
}
