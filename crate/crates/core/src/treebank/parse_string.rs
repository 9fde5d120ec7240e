use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{OnceLock, RwLock};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::tree::RawTree;
use crate::error::{Error, Result};

#[derive(Default)]
struct Interner {
    ids: HashMap<&'static str, u32>,
    names: Vec<&'static str>,
}

fn interner() -> &'static RwLock<Interner> {
    static INTERNER: OnceLock<RwLock<Interner>> = OnceLock::new();
    INTERNER.get_or_init(Default::default)
}

/// An interned constituent label. Equality is exact string equality, so
/// collapsed labels such as `NP+SBAR+S` compare as a whole.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Label(u32);

impl Label {
    pub fn new(name: &str) -> Label {
        if let Some(&id) = interner().read().expect("label interner").ids.get(name) {
            return Label(id);
        }
        let mut table = interner().write().expect("label interner");
        if let Some(&id) = table.ids.get(name) {
            return Label(id);
        }
        let id = u32::try_from(table.names.len()).expect("label table overflow");
        let name: &'static str = Box::leak(name.to_owned().into_boxed_str());
        table.names.push(name);
        table.ids.insert(name, id);
        Label(id)
    }

    pub fn as_str(self) -> &'static str {
        interner().read().expect("label interner").names[self.0 as usize]
    }

    pub(crate) fn index(self) -> u32 {
        self.0
    }
}

impl fmt::Debug for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.as_str())
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Token {
    Open(Label),
    Close,
}

impl Token {
    pub fn open(label: &str) -> Token {
        Token::Open(Label::new(label))
    }

    /// Dense integer key: 0 for `Close`, label index + 1 for `Open`.
    pub(crate) fn key(self) -> u32 {
        match self {
            Token::Close => 0,
            Token::Open(label) => label.index() + 1,
        }
    }
}

/// A lexicon-free linearization of one or more constituency trees.
///
/// Prototypes synthesized from segments of different strings need not be
/// balanced, so balance is checked by [`ParseString::is_balanced`] and
/// [`render`] rather than enforced on construction.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct ParseString(Vec<Token>);

impl ParseString {
    pub fn new(tokens: Vec<Token>) -> Self {
        ParseString(tokens)
    }

    pub fn empty() -> Self {
        ParseString(Vec::new())
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn into_tokens(self) -> Vec<Token> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn append(&mut self, other: &ParseString) {
        self.0.extend_from_slice(&other.0);
    }

    /// Position of the first token that breaks nesting, if any.
    fn first_imbalance(&self) -> Option<usize> {
        let mut depth = 0usize;
        for (i, token) in self.0.iter().enumerate() {
            match token {
                Token::Open(_) => depth += 1,
                Token::Close => {
                    if depth == 0 {
                        return Some(i);
                    }
                    depth -= 1;
                }
            }
        }
        (depth != 0).then_some(self.0.len())
    }

    pub fn is_balanced(&self) -> bool {
        self.first_imbalance().is_none()
    }

    fn write_tokens(&self, out: &mut impl fmt::Write) -> fmt::Result {
        let mut first = true;
        for token in &self.0 {
            match token {
                Token::Open(label) => {
                    if !first {
                        out.write_char(' ')?;
                    }
                    out.write_char('(')?;
                    out.write_str(label.as_str())?;
                }
                Token::Close => out.write_char(')')?,
            }
            first = false;
        }
        Ok(())
    }
}

impl From<Vec<Token>> for ParseString {
    fn from(tokens: Vec<Token>) -> Self {
        ParseString(tokens)
    }
}

impl FromIterator<Token> for ParseString {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        ParseString(iter.into_iter().collect())
    }
}

/// Same layout as [`render`], but also accepts unbalanced sequences.
impl fmt::Display for ParseString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_tokens(f)
    }
}

/// Reads rendered token text: `(LABEL` opens, `)` closes. Words are
/// rejected; balance is not required.
impl FromStr for ParseString {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut tokens = Vec::new();
        let mut rest = text;
        while let Some(c) = rest.trim_start().chars().next() {
            let offset = text.len() - rest.trim_start().len();
            rest = rest.trim_start();
            match c {
                '(' => {
                    let body = &rest[1..];
                    let len = body
                        .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                        .unwrap_or(body.len());
                    if len == 0 {
                        return Err(Error::malformed(offset, "empty label"));
                    }
                    tokens.push(Token::open(&body[..len]));
                    rest = &body[len..];
                }
                ')' => {
                    tokens.push(Token::Close);
                    rest = &rest[1..];
                }
                _ => return Err(Error::malformed(offset, "unexpected word in parse string")),
            }
        }
        Ok(ParseString(tokens))
    }
}

impl Serialize for ParseString {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ParseString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Pre-order emission of a stripped tree: `Open(label)` on entry, `Close` on
/// exit.
pub fn linearize(tree: &RawTree) -> Result<ParseString> {
    let mut tokens = Vec::with_capacity(2 * tree.node_count());
    emit(tree, &mut tokens)?;
    Ok(ParseString(tokens))
}

/// Linearizes each tree in order and concatenates the results; an empty
/// forest gives the empty parse string.
pub fn linearize_forest(trees: &[RawTree]) -> Result<ParseString> {
    let mut tokens = Vec::new();
    for tree in trees {
        emit(tree, &mut tokens)?;
    }
    Ok(ParseString(tokens))
}

fn emit(tree: &RawTree, out: &mut Vec<Token>) -> Result<()> {
    if let Some(word) = &tree.word {
        return Err(Error::NotStripped {
            label: tree.label.clone(),
            word: word.clone(),
        });
    }
    out.push(Token::open(&tree.label));
    for child in &tree.children {
        emit(child, out)?;
    }
    out.push(Token::Close);
    Ok(())
}

/// Canonical text of a balanced parse string, e.g. `(NP (PRP$) (NN))`.
pub fn render(ps: &ParseString) -> Result<String> {
    if let Some(position) = ps.first_imbalance() {
        return Err(Error::Unbalanced { position });
    }
    Ok(ps.to_string())
}
