//! Command-line front end and the on-disk formats it reads and writes.
//!
//! * Corpus files are JSON Lines, one argument per line:
//!   `{"id": .., "text": .., "trees": [..], "gold": .., "source": ..}`.
//! * Prototype files are one JSON object holding the rendered prototypes
//!   and how they were built.
//! * Classification results are JSON Lines with six-decimal distances.
//! * Sweeps write comma-separated tables.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classifier::{check_threshold, Classification, Classifier};
use crate::error::Error;
use crate::eval::{
    self, EvalOptions, MacroScores, DEFAULT_SENSITIVITY_SIZES, DEFAULT_SWEEP_FRACTIONS,
    DEFAULT_SWEEP_SEGMENTS, DEFAULT_TRIALS,
};
use crate::prototype::{
    build_prototypes, BuildConfig, Method, PrototypeSet, DEFAULT_SEGMENTS, DEFAULT_SET_FRACTION,
};
use crate::tactic::{Category, LabeledArgument, TacticId, TacticNames};
use crate::treebank::{argument_parse_string, render, ParseString};

pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_FORMAT: i32 = 3;
pub const EXIT_DATA: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{0}")]
    Config(String),
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{0}")]
    Data(String),
    #[error("{failed} of {total} records could not be classified")]
    PartialFailure { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Format { .. } | CliError::PartialFailure { .. } => EXIT_FORMAT,
            CliError::Data(_) => EXIT_DATA,
        }
    }

    fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    fn format(path: &Path, line: usize, message: impl ToString) -> Self {
        CliError::Format {
            path: path.to_path_buf(),
            line,
            message: message.to_string(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidThreshold(_)
            | Error::InvalidFraction(_)
            | Error::InvalidSegmentCount
            | Error::InvalidSampleSize { .. } => CliError::Config(e.to_string()),
            _ => CliError::Data(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

/// One line of a corpus file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub trees: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

/// A corpus record with its trees already reduced to a parse string.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRecord {
    pub line: usize,
    pub id: String,
    pub parse: Result<ParseString, Error>,
    pub gold: Option<Category>,
    pub source: Option<String>,
}

/// Reads a JSON Lines corpus. Blank lines are skipped; line numbers are
/// 1-based. Record-level structure (JSON shape, unique ids, non-empty tree
/// lists, gold names) is checked here; tree syntax errors are kept on the
/// record so callers can decide whether they are fatal.
pub fn read_corpus(path: &Path, names: &TacticNames) -> CliResult<Vec<ParsedRecord>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_corpus(&text, path, names)
}

pub fn parse_corpus(text: &str, path: &Path, names: &TacticNames) -> CliResult<Vec<ParsedRecord>> {
    let mut ids = HashSet::new();
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: CorpusRecord =
            serde_json::from_str(line).map_err(|e| CliError::format(path, line_no, e))?;
        if record.trees.is_empty() {
            return Err(CliError::format(path, line_no, "record has no trees"));
        }
        if !ids.insert(record.id.clone()) {
            return Err(CliError::format(
                path,
                line_no,
                format!("duplicate id {:?}", record.id),
            ));
        }
        let gold = record
            .gold
            .as_deref()
            .map(|g| names.category(g))
            .transpose()
            .map_err(|e| CliError::format(path, line_no, e))?;
        out.push(ParsedRecord {
            line: line_no,
            parse: argument_parse_string(&record.trees),
            id: record.id,
            gold,
            source: record.source,
        });
    }
    Ok(out)
}

/// Labelled arguments for building and evaluation: every record needs a
/// valid tree and a gold label.
fn labeled(records: Vec<ParsedRecord>, path: &Path) -> CliResult<Vec<LabeledArgument>> {
    if records.iter().all(|r| r.gold.is_none()) {
        return Err(CliError::Data(format!(
            "{}: no gold labels",
            path.display()
        )));
    }
    records
        .into_iter()
        .map(|r| {
            let parse = r.parse.map_err(|e| CliError::format(path, r.line, e))?;
            let gold = r
                .gold
                .ok_or_else(|| CliError::format(path, r.line, "record has no gold label"))?;
            Ok(LabeledArgument {
                id: r.id,
                parse,
                gold,
                source: r.source.unwrap_or_default(),
            })
        })
        .collect()
}

pub fn read_prototypes(path: &Path) -> CliResult<PrototypeSet> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e.line(), e))
}

pub fn prototype_file_text(set: &PrototypeSet) -> String {
    let mut text = serde_json::to_string_pretty(set).expect("prototype set serializes");
    text.push('\n');
    text
}

fn write_output(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(path) => fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io(Path::new("<stdout>"), e)),
    }
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

/// One line of a results file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decision: Option<Category>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<BTreeMap<TacticId, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_similarity: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ResultRecord {
    pub fn from_classification(id: String, c: &Classification) -> Self {
        ResultRecord {
            id,
            decision: Some(c.decision),
            distances: Some(
                TacticId::ALL
                    .into_iter()
                    .map(|t| (t, round6(c.distance(t))))
                    .collect(),
            ),
            best_similarity: Some(round6(c.best_similarity)),
            error: None,
        }
    }

    fn failed(id: String, error: String) -> Self {
        ResultRecord {
            id,
            decision: None,
            distances: None,
            best_similarity: None,
            error: Some(error),
        }
    }
}

fn parse_list<T: std::str::FromStr>(text: &str, flag: &str) -> CliResult<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| CliError::Config(format!("--{flag}: cannot parse {s:?}")))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Median,
    Synthetic,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Median => Method::Median,
            MethodArg::Synthetic => Method::Synthetic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepKind {
    Params,
    Sensitivity,
    Threshold,
}

#[derive(Debug, Parser)]
#[command(
    name = "synproto",
    version,
    about = "Persuasion tactic classification from parse-tree structure"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build one prototype per tactic from a labelled corpus.
    Build(BuildArgs),
    /// Classify every record of a corpus file.
    Classify(ClassifyArgs),
    /// Score a labelled corpus against a prototype file.
    Evaluate(EvaluateArgs),
    /// Parameter, sensitivity or threshold sweeps.
    Sweep(SweepArgs),
    /// Print the parse string of bracketed trees given on stdin, one per line.
    ParseString,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_enum, default_value = "synthetic")]
    pub method: MethodArg,
    #[arg(long, default_value_t = DEFAULT_SET_FRACTION)]
    pub fraction: f64,
    #[arg(long, default_value_t = DEFAULT_SEGMENTS)]
    pub segments: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub prototypes: PathBuf,
    /// Reject inputs whose similarity to every prototype is below this.
    #[arg(long, num_args = 0..=1, default_missing_value = "0.1")]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub prototypes: PathBuf,
    #[arg(long, num_args = 0..=1, default_missing_value = "0.1")]
    pub threshold: Option<f64>,
    /// Leave the non-argument bucket out of the macro averages.
    #[arg(long)]
    pub exclude_non_argument: bool,
    /// Machine-readable JSON report.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub kind: SweepKind,
    #[arg(long)]
    pub corpus: PathBuf,
    /// Required for sensitivity and threshold sweeps.
    #[arg(long)]
    pub prototypes: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "synthetic")]
    pub method: MethodArg,
    /// Comma-separated set fractions (params sweep).
    #[arg(long)]
    pub fraction: Option<String>,
    /// Comma-separated segment counts (params sweep).
    #[arg(long)]
    pub segments: Option<String>,
    /// Comma-separated sample sizes; `all` means the whole corpus.
    #[arg(long)]
    pub sizes: Option<String>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Comma-separated thresholds.
    #[arg(long)]
    pub thresholds: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Build(args) => cmd_build(&args),
        Command::Classify(args) => cmd_classify(&args),
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::ParseString => cmd_parse_string(),
    }
}

pub fn cmd_build(args: &BuildArgs) -> CliResult<()> {
    let corpus = labeled(
        read_corpus(&args.corpus, &TacticNames::default())?,
        &args.corpus,
    )?;
    let config = BuildConfig {
        method: args.method.into(),
        set_fraction: args.fraction,
        segments: args.segments,
        seed: args.seed,
    };
    let set = build_prototypes(&corpus, &config)?;
    for (a, b) in set.duplicates() {
        eprintln!("warning: prototypes for {a} and {b} are identical");
    }
    write_output(args.out.as_deref(), &prototype_file_text(&set))
}

pub fn cmd_classify(args: &ClassifyArgs) -> CliResult<()> {
    if let Some(t) = args.threshold {
        check_threshold(t)?;
    }
    let protos = read_prototypes(&args.prototypes)?;
    let records = read_corpus(&args.input, &TacticNames::default())?;
    let classifier = Classifier::new(&protos);
    let parsed: Vec<ParseString> = records
        .iter()
        .map(|r| r.parse.clone().unwrap_or_default())
        .collect();
    let results = classifier.classify_batch(&parsed, args.threshold)?;
    let mut out = String::new();
    let mut failed = 0;
    for (record, result) in records.into_iter().zip(&results) {
        let line = match &record.parse {
            Ok(_) => ResultRecord::from_classification(record.id, result),
            Err(e) => {
                failed += 1;
                ResultRecord::failed(record.id, format!("line {}: {e}", record.line))
            }
        };
        out.push_str(&serde_json::to_string(&line).expect("result serializes"));
        out.push('\n');
    }
    write_output(args.out.as_deref(), &out)?;
    if failed > 0 {
        return Err(CliError::PartialFailure {
            failed,
            total: results.len(),
        });
    }
    Ok(())
}

pub fn cmd_evaluate(args: &EvaluateArgs) -> CliResult<()> {
    if let Some(t) = args.threshold {
        check_threshold(t)?;
    }
    let protos = read_prototypes(&args.prototypes)?;
    let corpus = labeled(
        read_corpus(&args.corpus, &TacticNames::default())?,
        &args.corpus,
    )?;
    let options = EvalOptions {
        threshold: args.threshold,
        non_argument_in_macro: !args.exclude_non_argument,
    };
    let report = eval::evaluate_with(&corpus, &Classifier::new(&protos), &options)?;
    print!("{report}");
    if let Some(path) = &args.out {
        let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
        write_output(Some(path), &text)?;
    }
    Ok(())
}

fn fmt_cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.6}"))
}

fn trial_columns(out: &mut String, trials: usize) {
    for i in 1..=trials {
        write!(out, ",trial{i}_f1").unwrap();
    }
    out.push('\n');
}

fn trial_values(out: &mut String, mean: &MacroScores, trials: &[MacroScores]) {
    write!(
        out,
        ",{},{},{}",
        fmt_cell(mean.precision),
        fmt_cell(mean.recall),
        fmt_cell(mean.f1)
    )
    .unwrap();
    for t in trials {
        write!(out, ",{}", fmt_cell(t.f1)).unwrap();
    }
    out.push('\n');
}

pub fn cmd_sweep(args: &SweepArgs) -> CliResult<()> {
    let corpus = labeled(
        read_corpus(&args.corpus, &TacticNames::default())?,
        &args.corpus,
    )?;
    let needs_protos = || {
        args.prototypes
            .as_deref()
            .ok_or_else(|| CliError::Config("--prototypes is required for this sweep".into()))
            .and_then(read_prototypes)
    };
    let mut out = String::new();
    match args.kind {
        SweepKind::Params => {
            let fractions = match &args.fraction {
                Some(s) => parse_list(s, "fraction")?,
                None => DEFAULT_SWEEP_FRACTIONS.to_vec(),
            };
            let segments = match &args.segments {
                Some(s) => parse_list(s, "segments")?,
                None => DEFAULT_SWEEP_SEGMENTS.to_vec(),
            };
            let cells = eval::parameter_sweep(
                &corpus,
                args.method.into(),
                &fractions,
                &segments,
                args.trials,
                args.seed,
            )?;
            out.push_str("fraction,segments,mean_precision,mean_recall,mean_f1");
            trial_columns(&mut out, args.trials);
            for cell in &cells {
                let segs = cell
                    .segments
                    .map_or_else(|| "NA".to_string(), |k| k.to_string());
                write!(out, "{},{}", cell.fraction, segs).unwrap();
                trial_values(&mut out, &cell.mean, &cell.trials);
            }
        }
        SweepKind::Sensitivity => {
            let protos = needs_protos()?;
            let sizes = match &args.sizes {
                Some(s) => s
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        if s.eq_ignore_ascii_case("all") {
                            Ok(corpus.len())
                        } else {
                            s.parse().map_err(|_| {
                                CliError::Config(format!("--sizes: cannot parse {s:?}"))
                            })
                        }
                    })
                    .collect::<CliResult<Vec<usize>>>()?,
                None => DEFAULT_SENSITIVITY_SIZES
                    .into_iter()
                    .filter(|&s| s < corpus.len())
                    .chain([corpus.len()])
                    .collect(),
            };
            let rows = eval::sensitivity_run(&corpus, &protos, &sizes, args.trials, args.seed)?;
            out.push_str("size,mean_precision,mean_recall,mean_f1");
            trial_columns(&mut out, args.trials);
            for row in &rows {
                write!(out, "{}", row.size).unwrap();
                trial_values(&mut out, &row.mean, &row.trials);
            }
        }
        SweepKind::Threshold => {
            let protos = needs_protos()?;
            let thresholds = match &args.thresholds {
                Some(s) => parse_list(s, "thresholds")?,
                None => (0..=10).map(|i| i as f64 * 0.05).collect(),
            };
            let rows = eval::threshold_sweep(&corpus, &protos, &thresholds)?;
            out.push_str("threshold,rejected,precision,recall,f1\n");
            for row in &rows {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    row.threshold,
                    row.rejected,
                    fmt_cell(row.scores.precision),
                    fmt_cell(row.scores.recall),
                    fmt_cell(row.scores.f1)
                )
                .unwrap();
            }
        }
    }
    write_output(args.out.as_deref(), &out)
}

fn cmd_parse_string() -> CliResult<()> {
    let mut input = String::new();
    io::Read::read_to_string(&mut io::stdin(), &mut input)
        .map_err(|e| CliError::io(Path::new("<stdin>"), e))?;
    let mut out = String::new();
    for (i, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let ps = argument_parse_string(&[line])
            .map_err(|e| CliError::format(Path::new("<stdin>"), i + 1, e))?;
        out.push_str(&render(&ps)?);
        out.push('\n');
    }
    write_output(None, &out)
}
