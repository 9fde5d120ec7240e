use std::fmt;

use crate::error::{Error, Result};

/// A constituency tree node as read from bracketed text.
///
/// Preterminals carry their word in `word` and have no children. After
/// [`strip_terminals`] every node is word-free, and POS tags survive as
/// childless leaves.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RawTree {
    pub label: String,
    pub children: Vec<RawTree>,
    pub word: Option<String>,
}

impl RawTree {
    pub fn node(label: impl Into<String>, children: Vec<RawTree>) -> Self {
        RawTree {
            label: label.into(),
            children,
            word: None,
        }
    }

    pub fn preterminal(label: impl Into<String>, word: impl Into<String>) -> Self {
        RawTree {
            label: label.into(),
            children: Vec::new(),
            word: Some(word.into()),
        }
    }

    pub fn leaf(label: impl Into<String>) -> Self {
        Self::node(label, Vec::new())
    }

    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(RawTree::node_count).sum::<usize>()
    }

    pub fn has_words(&self) -> bool {
        self.word.is_some() || self.children.iter().any(RawTree::has_words)
    }

    /// Labels in depth-first pre-order.
    pub fn labels(&self) -> Vec<&str> {
        let mut out = Vec::with_capacity(self.node_count());
        self.collect_labels(&mut out);
        out
    }

    fn collect_labels<'a>(&'a self, out: &mut Vec<&'a str>) {
        out.push(&self.label);
        for child in &self.children {
            child.collect_labels(out);
        }
    }
}

impl fmt::Display for RawTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}", self.label)?;
        if let Some(word) = &self.word {
            write!(f, " {word}")?;
        }
        for child in &self.children {
            write!(f, " {child}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Lexeme<'a> {
    Open,
    Close,
    Atom(&'a str),
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src, pos: 0 }
    }

    fn skip_ws(&mut self) {
        let rest = &self.src[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    /// Returns the lexeme and its starting byte offset.
    fn next(&mut self) -> Option<(usize, Lexeme<'a>)> {
        self.skip_ws();
        let start = self.pos;
        let rest = &self.src[start..];
        let c = rest.chars().next()?;
        match c {
            '(' => {
                self.pos += 1;
                Some((start, Lexeme::Open))
            }
            ')' => {
                self.pos += 1;
                Some((start, Lexeme::Close))
            }
            _ => {
                let len = rest
                    .find(|c: char| c.is_whitespace() || c == '(' || c == ')')
                    .unwrap_or(rest.len());
                self.pos += len;
                Some((start, Lexeme::Atom(&rest[..len])))
            }
        }
    }
}

/// Reads one bracketed tree such as `(NP (PRP$ their) (NN relationship))`.
///
/// Wordless leaves like `(NN)` are accepted, so rendered parse strings of
/// single trees read back as stripped trees.
pub fn parse_bracketed(text: &str) -> Result<RawTree> {
    if text.trim().is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut lexer = Lexer::new(text);
    let tree = match lexer.next() {
        Some((_, Lexeme::Open)) => parse_node(&mut lexer)?,
        Some((offset, _)) => return Err(Error::malformed(offset, "expected '('")),
        None => return Err(Error::EmptyInput),
    };
    if let Some((offset, _)) = lexer.next() {
        return Err(Error::malformed(offset, "trailing input after root"));
    }
    Ok(tree)
}

// Called with the opening parenthesis already consumed.
fn parse_node(lexer: &mut Lexer<'_>) -> Result<RawTree> {
    let label = match lexer.next() {
        Some((_, Lexeme::Atom(label))) => label,
        Some((offset, _)) => return Err(Error::malformed(offset, "empty label")),
        None => return Err(Error::malformed(lexer.src.len(), "unbalanced parentheses")),
    };
    let mut node = RawTree::leaf(label);
    loop {
        match lexer.next() {
            Some((_, Lexeme::Close)) => return Ok(node),
            Some((offset, Lexeme::Open)) => {
                if node.word.is_some() {
                    return Err(Error::malformed(
                        offset,
                        "node has both a word and children",
                    ));
                }
                node.children.push(parse_node(lexer)?);
            }
            Some((offset, Lexeme::Atom(word))) => {
                if node.word.is_some() {
                    return Err(Error::malformed(
                        offset,
                        "more than one word under a preterminal",
                    ));
                }
                if !node.children.is_empty() {
                    return Err(Error::malformed(
                        offset,
                        "node has both a word and children",
                    ));
                }
                node.word = Some(word.to_string());
            }
            None => return Err(Error::malformed(lexer.src.len(), "unbalanced parentheses")),
        }
    }
}

/// Drops every word, keeping POS-tag nodes as childless leaves.
pub fn strip_terminals(mut tree: RawTree) -> RawTree {
    tree.word = None;
    tree.children = tree.children.into_iter().map(strip_terminals).collect();
    tree
}

/// Merges every chain of nodes with a single non-leaf child into one node
/// labelled `TOP+...+BOTTOM`. Leaves are never absorbed into the chain above.
pub fn collapse_unary_chains(mut tree: RawTree) -> RawTree {
    while tree.children.len() == 1 && !tree.children[0].is_leaf() {
        let child = tree.children.pop().expect("one child");
        tree.label.push('+');
        tree.label.push_str(&child.label);
        tree.children = child.children;
    }
    tree.children = tree
        .children
        .into_iter()
        .map(collapse_unary_chains)
        .collect();
    tree
}
