//! C ABI over `synproto`.
//!
//! Handles are opaque and owned by the caller once returned; free them with
//! the matching `*_free` function. Every fallible call returns an
//! [`SpStatus`]; on failure the message is available from
//! [`sp_last_error_message`] on the same thread.
//!
//! String outputs use caller buffers: `out_len` always receives the length
//! of the full result (without the trailing NUL), and the call fails with
//! `SP_STATUS_BUFFER_TOO_SMALL` if `buf_len` cannot hold it plus the NUL.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use synproto::classifier::Classifier;
use synproto::tactic::TACTIC_COUNT;
use synproto::treebank::{argument_parse_string, render};
use synproto::{
    build_prototypes, edit_distance, normalized_distance, BuildConfig, Category, Error,
    LabeledArgument, Method, ParseString, PrototypeSet, TacticId, TacticNames,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    EmptyInput = 3,
    MalformedTree = 4,
    Unbalanced = 5,
    InvalidArgument = 6,
    UnknownTactic = 7,
    MissingTactic = 8,
    InvalidThreshold = 9,
    Format = 10,
    BufferTooSmall = 11,
    Io = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpMethod {
    Median = 0,
    Synthetic = 1,
}

/// Index of the non-argument decision in [`SpClassification::decision`].
pub const SP_NON_ARGUMENT: i32 = 14;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpClassification {
    /// Tactic index 0..=13 in canonical order, or `SP_NON_ARGUMENT`.
    pub decision: i32,
    pub distances: [f64; 14],
    pub best_similarity: f64,
}

/// A prototype set compiled for classification.
pub struct SpPrototypeSet {
    set: PrototypeSet,
    classifier: Classifier,
}

impl SpPrototypeSet {
    fn new(set: PrototypeSet) -> Box<Self> {
        let classifier = Classifier::new(&set);
        Box::new(SpPrototypeSet { set, classifier })
    }
}

/// Labelled arguments collected for [`sp_builder_build`].
pub struct SpBuilder {
    corpus: Vec<LabeledArgument>,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: impl Into<String>) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
}

struct Failure(SpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::EmptyInput => SpStatus::EmptyInput,
            Error::MalformedTree { .. } | Error::NotStripped { .. } => SpStatus::MalformedTree,
            Error::Unbalanced { .. } => SpStatus::Unbalanced,
            Error::UnknownTactic(_) => SpStatus::UnknownTactic,
            Error::MissingTactic(_) => SpStatus::MissingTactic,
            Error::InvalidThreshold(_) => SpStatus::InvalidThreshold,
            Error::Item { source, .. } => {
                return Failure::from((**source).clone()).with_message(e.to_string())
            }
            _ => SpStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl Failure {
    fn with_message(self, msg: String) -> Self {
        Failure(self.0, msg)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> SpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SpStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("panic inside synproto");
            SpStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure(SpStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(SpStatus::InvalidUtf8, format!("{name} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| Failure(SpStatus::NullPointer, format!("{name} is null")))
}

unsafe fn tree_args<'a>(trees: *const *const c_char, n: usize) -> Result<Vec<&'a str>, Failure> {
    if n > 0 && trees.is_null() {
        return Err(Failure(SpStatus::NullPointer, "trees is null".into()));
    }
    (0..n).map(|i| str_arg(*trees.add(i), "tree")).collect()
}

unsafe fn write_str(
    text: &str,
    buf: *mut c_char,
    buf_len: usize,
    out_len: *mut usize,
) -> Result<(), Failure> {
    if !out_len.is_null() {
        *out_len = text.len();
    }
    if buf_len < text.len() + 1 {
        return Err(Failure(
            SpStatus::BufferTooSmall,
            format!("need {} bytes, have {buf_len}", text.len() + 1),
        ));
    }
    if buf.is_null() {
        return Err(Failure(SpStatus::NullPointer, "buf is null".into()));
    }
    ptr::copy_nonoverlapping(text.as_ptr(), buf as *mut u8, text.len());
    *buf.add(text.len()) = 0;
    Ok(())
}

fn parse_string(text: &str) -> Result<ParseString, Failure> {
    Ok(text.parse::<ParseString>()?)
}

fn threshold_arg(threshold: f64) -> Option<f64> {
    (threshold >= 0.0).then_some(threshold)
}

/// Copies the last error message of this thread into `buf`.
#[no_mangle]
pub unsafe extern "C" fn sp_last_error_message(
    buf: *mut c_char,
    buf_len: usize,
    out_len: *mut usize,
) -> SpStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    match write_str(&msg, buf, buf_len, out_len) {
        Ok(()) => SpStatus::Ok,
        Err(Failure(status, _)) => status,
    }
}

#[no_mangle]
pub extern "C" fn sp_tactic_count() -> usize {
    TACTIC_COUNT
}

/// Canonical snake-case name of tactic `index`, or of the non-argument
/// bucket for `SP_NON_ARGUMENT`; NULL when out of range. The string is
/// static and must not be freed.
#[no_mangle]
pub extern "C" fn sp_tactic_name(index: i32) -> *const c_char {
    const NAMES: [&CStr; 15] = [
        c"outcome",
        c"social_esteem",
        c"threat_promise",
        c"self_feeling",
        c"good_bad_traits",
        c"deontic_moral_appeal",
        c"vip",
        c"popularity",
        c"favors_debts",
        c"consistency",
        c"empathy",
        c"scarcity",
        c"recharacterization",
        c"reasoning",
        c"non-argument",
    ];
    usize::try_from(index)
        .ok()
        .and_then(|i| NAMES.get(i))
        .map_or(ptr::null(), |s| s.as_ptr())
}

/// Renders the parse string of an argument given as `n_trees` bracketed
/// trees.
#[no_mangle]
pub unsafe extern "C" fn sp_parse_string(
    trees: *const *const c_char,
    n_trees: usize,
    buf: *mut c_char,
    buf_len: usize,
    out_len: *mut usize,
) -> SpStatus {
    guard(|| {
        let trees = tree_args(trees, n_trees)?;
        let ps = argument_parse_string(&trees)?;
        write_str(&render(&ps)?, buf, buf_len, out_len)
    })
}

/// Unit-cost edit distance between two rendered parse strings.
#[no_mangle]
pub unsafe extern "C" fn sp_edit_distance(
    a: *const c_char,
    b: *const c_char,
    out: *mut usize,
) -> SpStatus {
    guard(|| {
        let a = parse_string(str_arg(a, "a")?)?;
        let b = parse_string(str_arg(b, "b")?)?;
        *out_arg(out, "out")? = edit_distance(&a, &b);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sp_normalized_distance(
    a: *const c_char,
    b: *const c_char,
    out: *mut f64,
) -> SpStatus {
    guard(|| {
        let a = parse_string(str_arg(a, "a")?)?;
        let b = parse_string(str_arg(b, "b")?)?;
        *out_arg(out, "out")? = normalized_distance(&a, &b);
        Ok(())
    })
}

/// Loads a prototype set from the text of a prototype file.
#[no_mangle]
pub unsafe extern "C" fn sp_prototypes_from_json(
    json: *const c_char,
    out: *mut *mut SpPrototypeSet,
) -> SpStatus {
    guard(|| {
        let json = str_arg(json, "json")?;
        let out = out_arg(out, "out")?;
        let set: PrototypeSet =
            serde_json::from_str(json).map_err(|e| Failure(SpStatus::Format, e.to_string()))?;
        *out = Box::into_raw(SpPrototypeSet::new(set));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sp_prototypes_from_file(
    path: *const c_char,
    out: *mut *mut SpPrototypeSet,
) -> SpStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let out = out_arg(out, "out")?;
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure(SpStatus::Io, format!("{path}: {e}")))?;
        let set: PrototypeSet = serde_json::from_str(&text)
            .map_err(|e| Failure(SpStatus::Format, format!("{path}: {e}")))?;
        *out = Box::into_raw(SpPrototypeSet::new(set));
        Ok(())
    })
}

/// Serializes a prototype set in the prototype file layout.
#[no_mangle]
pub unsafe extern "C" fn sp_prototypes_to_json(
    set: *const SpPrototypeSet,
    buf: *mut c_char,
    buf_len: usize,
    out_len: *mut usize,
) -> SpStatus {
    guard(|| {
        let set = set
            .as_ref()
            .ok_or_else(|| Failure(SpStatus::NullPointer, "set is null".into()))?;
        let json = serde_json::to_string_pretty(&set.set).expect("prototype set serializes");
        write_str(&json, buf, buf_len, out_len)
    })
}

/// Rendered prototype of tactic `index`.
#[no_mangle]
pub unsafe extern "C" fn sp_prototypes_get(
    set: *const SpPrototypeSet,
    index: i32,
    buf: *mut c_char,
    buf_len: usize,
    out_len: *mut usize,
) -> SpStatus {
    guard(|| {
        let set = set
            .as_ref()
            .ok_or_else(|| Failure(SpStatus::NullPointer, "set is null".into()))?;
        let tactic = usize::try_from(index)
            .ok()
            .and_then(TacticId::from_index)
            .ok_or_else(|| Failure(SpStatus::InvalidArgument, format!("no tactic {index}")))?;
        write_str(&set.set.get(tactic).to_string(), buf, buf_len, out_len)
    })
}

#[no_mangle]
pub unsafe extern "C" fn sp_prototypes_free(set: *mut SpPrototypeSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

fn fill(out: &mut SpClassification, c: &synproto::Classification) {
    out.decision = match c.decision {
        Category::Tactic(t) => t.index() as i32,
        Category::NonArgument => SP_NON_ARGUMENT,
    };
    out.distances = c.distances;
    out.best_similarity = c.best_similarity;
}

fn classify_into(
    set: &SpPrototypeSet,
    ps: &ParseString,
    threshold: f64,
    out: &mut SpClassification,
) -> Result<(), Failure> {
    let c = match threshold_arg(threshold) {
        Some(t) => set.classifier.classify_with_rejection(ps, t)?,
        None => set.classifier.classify(ps),
    };
    fill(out, &c);
    Ok(())
}

/// Classifies a rendered parse string. A negative `threshold` disables
/// non-argument rejection.
#[no_mangle]
pub unsafe extern "C" fn sp_classify(
    set: *const SpPrototypeSet,
    parse_string: *const c_char,
    threshold: f64,
    out: *mut SpClassification,
) -> SpStatus {
    guard(|| {
        let set = set
            .as_ref()
            .ok_or_else(|| Failure(SpStatus::NullPointer, "set is null".into()))?;
        let ps = parse_string_arg(parse_string)?;
        classify_into(set, &ps, threshold, out_arg(out, "out")?)
    })
}

unsafe fn parse_string_arg(p: *const c_char) -> Result<ParseString, Failure> {
    parse_string(str_arg(p, "parse_string")?)
}

/// Classifies an argument given as bracketed trees.
#[no_mangle]
pub unsafe extern "C" fn sp_classify_trees(
    set: *const SpPrototypeSet,
    trees: *const *const c_char,
    n_trees: usize,
    threshold: f64,
    out: *mut SpClassification,
) -> SpStatus {
    guard(|| {
        let set = set
            .as_ref()
            .ok_or_else(|| Failure(SpStatus::NullPointer, "set is null".into()))?;
        let ps = argument_parse_string(&tree_args(trees, n_trees)?)?;
        classify_into(set, &ps, threshold, out_arg(out, "out")?)
    })
}

#[no_mangle]
pub extern "C" fn sp_builder_new() -> *mut SpBuilder {
    Box::into_raw(Box::new(SpBuilder { corpus: Vec::new() }))
}

/// Adds one argument. `gold` is a tactic name (aliases accepted) or
/// "non-argument"; `trees` are its bracketed trees.
#[no_mangle]
pub unsafe extern "C" fn sp_builder_add(
    builder: *mut SpBuilder,
    gold: *const c_char,
    trees: *const *const c_char,
    n_trees: usize,
) -> SpStatus {
    guard(|| {
        let builder = out_arg(builder, "builder")?;
        let gold = TacticNames::default().category(str_arg(gold, "gold")?)?;
        let parse = argument_parse_string(&tree_args(trees, n_trees)?)?;
        let id = builder.corpus.len().to_string();
        builder.corpus.push(LabeledArgument::new(id, parse, gold));
        Ok(())
    })
}

/// Builds prototypes from the collected arguments. The builder stays valid
/// and may be reused.
#[no_mangle]
pub unsafe extern "C" fn sp_builder_build(
    builder: *const SpBuilder,
    method: SpMethod,
    set_fraction: f64,
    segments: usize,
    seed: u64,
    out: *mut *mut SpPrototypeSet,
) -> SpStatus {
    guard(|| {
        let builder = builder
            .as_ref()
            .ok_or_else(|| Failure(SpStatus::NullPointer, "builder is null".into()))?;
        let out = out_arg(out, "out")?;
        let config = BuildConfig {
            method: match method {
                SpMethod::Median => Method::Median,
                SpMethod::Synthetic => Method::Synthetic,
            },
            set_fraction,
            segments,
            seed,
        };
        let set = build_prototypes(&builder.corpus, &config)?;
        *out = Box::into_raw(SpPrototypeSet::new(set));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sp_builder_free(builder: *mut SpBuilder) {
    if !builder.is_null() {
        drop(Box::from_raw(builder));
    }
}
