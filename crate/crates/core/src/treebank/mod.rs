//! Bracketed constituency trees and their word-free parse strings.

mod parse_string;
mod tree;

pub use parse_string::{linearize, linearize_forest, render, Label, ParseString, Token};
pub use tree::{collapse_unary_chains, parse_bracketed, strip_terminals, RawTree};

use crate::error::Result;

/// Full pipeline for one bracketed tree: parse, strip words, collapse unary
/// chains, linearize.
pub fn tree_to_parse_string(text: &str) -> Result<ParseString> {
    let tree = collapse_unary_chains(strip_terminals(parse_bracketed(text)?));
    linearize(&tree)
}

/// Parse string of a multi-sentence argument: each tree goes through
/// [`tree_to_parse_string`] and the results are concatenated in order.
pub fn argument_parse_string<S: AsRef<str>>(trees: &[S]) -> Result<ParseString> {
    let mut out = ParseString::empty();
    for (i, text) in trees.iter().enumerate() {
        let ps = tree_to_parse_string(text.as_ref()).map_err(|e| e.at(i))?;
        out.append(&ps);
    }
    Ok(out)
}
