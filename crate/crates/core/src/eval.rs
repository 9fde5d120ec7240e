//! Evaluation harness: one-vs-rest tallies, precision/recall/F1 with macro
//! averages, per-category accuracy, tactic distributions and the sweeps used
//! to tune prototype construction and the rejection threshold.

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{check_threshold, Classification, Classifier};
use crate::error::{Error, Result};
use crate::prototype::{build_prototypes, BuildConfig, Method, PrototypeSet};
use crate::tactic::{Category, TacticId, TACTIC_COUNT};
use crate::treebank::ParseString;

pub use crate::tactic::LabeledArgument;

/// Fourteen tactics plus the non-argument bucket.
pub const BUCKETS: usize = TACTIC_COUNT + 1;

pub fn bucket(c: Category) -> usize {
    match c {
        Category::Tactic(t) => t.index(),
        Category::NonArgument => TACTIC_COUNT,
    }
}

pub fn bucket_category(i: usize) -> Category {
    TacticId::from_index(i).map_or(Category::NonArgument, Category::Tactic)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Counts {
    pub retrieved: usize,
    pub relevant: usize,
    pub hits: usize,
}

/// Precision, recall and F1; `None` where a denominator is zero.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl Counts {
    pub fn metrics(&self) -> ClassMetrics {
        let ratio = |num: usize, den: usize| (den > 0).then(|| num as f64 / den as f64);
        let precision = ratio(self.hits, self.retrieved);
        let recall = ratio(self.hits, self.relevant);
        let f1 = match (precision, recall) {
            // Both zero: the harmonic mean's limit is 0.
            (Some(p), Some(r)) if p + r == 0.0 => Some(0.0),
            (Some(p), Some(r)) => Some(2.0 * p * r / (p + r)),
            _ => None,
        };
        ClassMetrics {
            precision,
            recall,
            f1,
        }
    }
}

/// Gold-by-predicted counts over the fifteen buckets.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionTally {
    /// `matrix[gold][predicted]`
    pub matrix: [[usize; BUCKETS]; BUCKETS],
}

impl ConfusionTally {
    pub fn from_pairs<I: IntoIterator<Item = (Category, Category)>>(pairs: I) -> Self {
        let mut tally = ConfusionTally::default();
        for (gold, predicted) in pairs {
            tally.record(gold, predicted);
        }
        tally
    }

    pub fn record(&mut self, gold: Category, predicted: Category) {
        self.matrix[bucket(gold)][bucket(predicted)] += 1;
    }

    pub fn counts(&self, c: Category) -> Counts {
        let i = bucket(c);
        Counts {
            retrieved: self.matrix.iter().map(|row| row[i]).sum(),
            relevant: self.matrix[i].iter().sum(),
            hits: self.matrix[i][i],
        }
    }

    pub fn total(&self) -> usize {
        self.matrix.iter().flatten().sum()
    }

    pub fn rejected(&self) -> usize {
        self.counts(Category::NonArgument).retrieved
    }
}

pub fn tactic_metrics(tally: &ConfusionTally, t: TacticId) -> ClassMetrics {
    tally.counts(Category::Tactic(t)).metrics()
}

/// Fraction of gold-`t` arguments predicted as `t`, for every tactic that
/// has at least one gold argument.
pub fn per_category_accuracy<I>(pairs: I) -> BTreeMap<TacticId, f64>
where
    I: IntoIterator<Item = (Category, Category)>,
{
    let mut seen = [0usize; TACTIC_COUNT];
    let mut right = [0usize; TACTIC_COUNT];
    for (gold, predicted) in pairs {
        if let Category::Tactic(t) = gold {
            seen[t.index()] += 1;
            right[t.index()] += usize::from(predicted == gold);
        }
    }
    TacticId::ALL
        .into_iter()
        .filter(|t| seen[t.index()] > 0)
        .map(|t| (t, right[t.index()] as f64 / seen[t.index()] as f64))
        .collect()
}

/// Share of each predicted tactic, in percent of the non-rejected
/// predictions. Tactics never predicted are omitted.
pub fn tactic_distribution<I>(predictions: I) -> Result<BTreeMap<TacticId, f64>>
where
    I: IntoIterator<Item = Category>,
{
    let mut counts = [0usize; TACTIC_COUNT];
    for c in predictions {
        if let Category::Tactic(t) = c {
            counts[t.index()] += 1;
        }
    }
    let total: usize = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyEvaluation);
    }
    Ok(TacticId::ALL
        .into_iter()
        .filter(|t| counts[t.index()] > 0)
        .map(|t| (t, 100.0 * counts[t.index()] as f64 / total as f64))
        .collect())
}

fn mean<I: IntoIterator<Item = Option<f64>>>(values: I) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .flatten()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub threshold: Option<f64>,
    /// Count the non-argument bucket as a class in the macro averages
    /// whenever it occurs among gold labels or predictions.
    pub non_argument_in_macro: bool,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            threshold: None,
            non_argument_in_macro: true,
        }
    }
}

impl EvalOptions {
    pub fn with_threshold(threshold: Option<f64>) -> Self {
        EvalOptions {
            threshold,
            ..EvalOptions::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    #[serde(flatten)]
    pub counts: Counts,
    #[serde(flatten)]
    pub metrics: ClassMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub total: usize,
    pub rejected: usize,
    pub threshold: Option<f64>,
    /// Classes entering the macro averages.
    pub classes: BTreeMap<Category, ClassReport>,
    pub macro_precision: Option<f64>,
    pub macro_recall: Option<f64>,
    pub macro_f1: Option<f64>,
    pub per_category_accuracy: BTreeMap<TacticId, f64>,
    pub distribution: BTreeMap<TacticId, f64>,
    /// All tactics merged into one positive class against non-arguments.
    pub persuasion_vs_non_argument: ClassMetrics,
    pub confusion: ConfusionTally,
}

impl MetricsReport {
    pub fn from_pairs(pairs: &[(Category, Category)], options: &EvalOptions) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyEvaluation);
        }
        let confusion = ConfusionTally::from_pairs(pairs.iter().copied());
        let mut classes = BTreeMap::new();
        for t in TacticId::ALL {
            let counts = confusion.counts(Category::Tactic(t));
            classes.insert(
                Category::Tactic(t),
                ClassReport {
                    counts,
                    metrics: counts.metrics(),
                },
            );
        }
        let na = confusion.counts(Category::NonArgument);
        if options.non_argument_in_macro && (na.relevant > 0 || na.retrieved > 0) {
            classes.insert(
                Category::NonArgument,
                ClassReport {
                    counts: na,
                    metrics: na.metrics(),
                },
            );
        }
        let persuasion = ConfusionTally::from_pairs(pairs.iter().map(|&(g, p)| {
            let merge = |c: Category| {
                c.tactic()
                    .map_or(c, |_| Category::Tactic(TacticId::Outcome))
            };
            (merge(g), merge(p))
        }));
        Ok(MetricsReport {
            total: confusion.total(),
            rejected: confusion.rejected(),
            threshold: options.threshold,
            macro_precision: mean(classes.values().map(|c| c.metrics.precision)),
            macro_recall: mean(classes.values().map(|c| c.metrics.recall)),
            macro_f1: mean(classes.values().map(|c| c.metrics.f1)),
            classes,
            per_category_accuracy: per_category_accuracy(pairs.iter().copied()),
            distribution: tactic_distribution(pairs.iter().map(|&(_, p)| p)).unwrap_or_default(),
            persuasion_vs_non_argument: persuasion
                .counts(Category::Tactic(TacticId::Outcome))
                .metrics(),
            confusion,
        })
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

impl fmt::Display for MetricsReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "arguments: {}  rejected: {}  threshold: {}",
            self.total,
            self.rejected,
            fmt_opt(self.threshold)
        )?;
        writeln!(
            f,
            "{:<22} {:>9} {:>8} {:>5} {:>9} {:>9} {:>9}",
            "class", "retrieved", "relevant", "hits", "precision", "recall", "f1"
        )?;
        for (c, r) in &self.classes {
            writeln!(
                f,
                "{:<22} {:>9} {:>8} {:>5} {:>9} {:>9} {:>9}",
                c.name(),
                r.counts.retrieved,
                r.counts.relevant,
                r.counts.hits,
                fmt_opt(r.metrics.precision),
                fmt_opt(r.metrics.recall),
                fmt_opt(r.metrics.f1)
            )?;
        }
        writeln!(
            f,
            "{:<22} {:>9} {:>8} {:>5} {:>9} {:>9} {:>9}",
            "macro",
            "",
            "",
            "",
            fmt_opt(self.macro_precision),
            fmt_opt(self.macro_recall),
            fmt_opt(self.macro_f1)
        )?;
        let b = &self.persuasion_vs_non_argument;
        writeln!(
            f,
            "persuasive vs non-argument: precision {} recall {} f1 {}",
            fmt_opt(b.precision),
            fmt_opt(b.recall),
            fmt_opt(b.f1)
        )?;
        writeln!(f, "\nper-category accuracy")?;
        for (t, acc) in &self.per_category_accuracy {
            writeln!(f, "  {:<22} {:>6.1}%", t.name(), 100.0 * acc)?;
        }
        writeln!(f, "\ntactic distribution")?;
        for (t, pct) in &self.distribution {
            writeln!(f, "  {:<22} {:>6.1}%", t.name(), pct)?;
        }
        Ok(())
    }
}

fn pairs_for(
    corpus: &[LabeledArgument],
    classes: &[Classification],
    threshold: Option<f64>,
) -> Vec<(Category, Category)> {
    corpus
        .iter()
        .zip(classes)
        .map(|(arg, c)| {
            let predicted = match threshold {
                Some(t) if c.best_similarity < t => Category::NonArgument,
                _ => Category::Tactic(c.nearest()),
            };
            (arg.gold, predicted)
        })
        .collect()
}

fn parses(corpus: &[LabeledArgument]) -> Vec<ParseString> {
    corpus.iter().map(|a| a.parse.clone()).collect()
}

pub fn evaluate_with(
    corpus: &[LabeledArgument],
    classifier: &Classifier,
    options: &EvalOptions,
) -> Result<MetricsReport> {
    if corpus.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    let classes = classifier.classify_batch(&parses(corpus), options.threshold)?;
    let pairs: Vec<_> = corpus
        .iter()
        .zip(&classes)
        .map(|(a, c)| (a.gold, c.decision))
        .collect();
    MetricsReport::from_pairs(&pairs, options)
}

/// Classifies every argument and scores the predictions against gold labels.
pub fn evaluate(
    corpus: &[LabeledArgument],
    protos: &PrototypeSet,
    threshold: Option<f64>,
) -> Result<MetricsReport> {
    evaluate_with(
        corpus,
        &Classifier::new(protos),
        &EvalOptions::with_threshold(threshold),
    )
}

/// Macro precision, recall and F1 of one run.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct MacroScores {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
}

impl From<&MetricsReport> for MacroScores {
    fn from(r: &MetricsReport) -> Self {
        MacroScores {
            precision: r.macro_precision,
            recall: r.macro_recall,
            f1: r.macro_f1,
        }
    }
}

impl MacroScores {
    fn average(runs: &[MacroScores]) -> MacroScores {
        MacroScores {
            precision: mean(runs.iter().map(|r| r.precision)),
            recall: mean(runs.iter().map(|r| r.recall)),
            f1: mean(runs.iter().map(|r| r.f1)),
        }
    }
}

/// ChaCha generator for one trial: the base seed offset by the trial index,
/// on a stream chosen by the caller.
pub fn trial_rng(seed: u64, trial: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub size: usize,
    pub trials: Vec<MacroScores>,
    pub mean: MacroScores,
}

pub const DEFAULT_SENSITIVITY_SIZES: [usize; 3] = [10, 100, 1000];
pub const DEFAULT_TRIALS: usize = 5;

/// Evaluates `trials` random subsamples of each size and averages them.
pub fn sensitivity_run(
    corpus: &[LabeledArgument],
    protos: &PrototypeSet,
    sizes: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<SensitivityRow>> {
    if corpus.is_empty() {
        return Err(Error::EmptyEvaluation);
    }
    if let Some(&size) = sizes.iter().find(|&&s| s == 0 || s > corpus.len()) {
        return Err(Error::InvalidSampleSize {
            size,
            available: corpus.len(),
        });
    }
    let classifier = Classifier::new(protos);
    let options = EvalOptions::default();
    sizes
        .iter()
        .map(|&size| {
            let runs = (0..trials)
                .into_par_iter()
                .map(|trial| {
                    let mut rng = trial_rng(seed, trial, size as u64);
                    let mut picked =
                        rand::seq::index::sample(&mut rng, corpus.len(), size).into_vec();
                    picked.sort_unstable();
                    let subset: Vec<LabeledArgument> =
                        picked.into_iter().map(|i| corpus[i].clone()).collect();
                    evaluate_with(&subset, &classifier, &options).map(|r| MacroScores::from(&r))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SensitivityRow {
                size,
                mean: MacroScores::average(&runs),
                trials: runs,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub fraction: f64,
    pub segments: Option<usize>,
    pub trials: Vec<MacroScores>,
    pub mean: MacroScores,
}

pub const DEFAULT_SWEEP_FRACTIONS: [f64; 6] = [0.02, 0.05, 0.10, 0.20, 0.30, 1.0];
pub const DEFAULT_SWEEP_SEGMENTS: [usize; 5] = [2, 3, 5, 7, 9];

/// Rebuilds prototypes for every (fraction, segments) cell and trial and
/// evaluates them on the whole corpus. Segment counts are ignored for the
/// median method, which yields one cell per fraction.
pub fn parameter_sweep(
    corpus: &[LabeledArgument],
    method: Method,
    fractions: &[f64],
    segment_counts: &[usize],
    trials: usize,
    seed: u64,
) -> Result<Vec<SweepCell>> {
    let grid: Vec<(f64, Option<usize>)> = match method {
        Method::Median => fractions.iter().map(|&f| (f, None)).collect(),
        Method::Synthetic => fractions
            .iter()
            .flat_map(|&f| segment_counts.iter().map(move |&k| (f, Some(k))))
            .collect(),
    };
    grid.into_par_iter()
        .map(|(fraction, segments)| {
            let runs = (0..trials)
                .map(|trial| {
                    let config = BuildConfig {
                        method,
                        set_fraction: fraction,
                        segments: segments.unwrap_or(1),
                        seed: seed.wrapping_add(trial as u64),
                    };
                    let protos = build_prototypes(corpus, &config)?;
                    evaluate(corpus, &protos, None).map(|r| MacroScores::from(&r))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(SweepCell {
                fraction,
                segments,
                mean: MacroScores::average(&runs),
                trials: runs,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRow {
    pub threshold: f64,
    pub rejected: usize,
    pub scores: MacroScores,
}

/// Evaluates with rejection at each threshold, in the order given.
pub fn threshold_sweep(
    corpus: &[LabeledArgument],
    protos: &PrototypeSet,
    thresholds: &[f64],
) -> Result<Vec<ThresholdRow>> {
    if !corpus.iter().any(|a| a.gold == Category::NonArgument) {
        return Err(Error::NoNonArguments);
    }
    for &t in thresholds {
        check_threshold(t)?;
    }
    let classes = Classifier::new(protos).classify_batch(&parses(corpus), None)?;
    thresholds
        .iter()
        .map(|&threshold| {
            let pairs = pairs_for(corpus, &classes, Some(threshold));
            let report =
                MetricsReport::from_pairs(&pairs, &EvalOptions::with_threshold(Some(threshold)))?;
            Ok(ThresholdRow {
                threshold,
                rejected: report.rejected,
                scores: MacroScores::from(&report),
            })
        })
        .collect()
}
