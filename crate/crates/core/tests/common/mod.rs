#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::Rng;
use synproto::treebank::{collapse_unary_chains, linearize, RawTree};
use synproto::{ParseString, Token};

pub const PHRASES: &[&str] = &["S", "NP", "VP", "PP", "SBAR", "ADJP", "ADVP"];
pub const TAGS: &[&str] = &[
    "NN", "NNS", "DT", "JJ", "VB", "VBZ", "VBD", "VBP", "IN", "PRP", "PRP$", "RB", "CC", ",", ".",
];

/// Random stripped tree with at most `depth` levels of phrases.
pub fn random_tree<R: Rng>(rng: &mut R, depth: usize) -> RawTree {
    if depth == 0 || rng.random_bool(0.3) {
        return RawTree::leaf(*TAGS.choose(rng).unwrap());
    }
    let label = *PHRASES.choose(rng).unwrap();
    let n = rng.random_range(1..=3);
    RawTree::node(label, (0..n).map(|_| random_tree(rng, depth - 1)).collect())
}

/// Random tree with words on every leaf.
pub fn random_worded_tree<R: Rng>(rng: &mut R, depth: usize) -> RawTree {
    fn add_words<R: Rng>(rng: &mut R, mut t: RawTree) -> RawTree {
        if t.children.is_empty() {
            t.word = Some(format!("w{}", rng.random_range(0..50)));
        } else {
            t.children = t.children.into_iter().map(|c| add_words(rng, c)).collect();
        }
        t
    }
    let t = random_tree(rng, depth);
    add_words(rng, t)
}

/// Parse string of a random collapsed tree with between `min` and `max`
/// tokens.
pub fn random_parse_string<R: Rng>(rng: &mut R, min: usize, max: usize) -> ParseString {
    loop {
        let depth = rng.random_range(2..=6);
        let tree = collapse_unary_chains(random_tree(rng, depth));
        let ps = linearize(&tree).unwrap();
        if (min..=max).contains(&ps.len()) {
            return ps;
        }
    }
}

/// Concatenates random trees until the string has about `len` tokens.
pub fn random_parse_string_of_len<R: Rng>(rng: &mut R, len: usize) -> ParseString {
    let mut out = ParseString::empty();
    while out.len() < len {
        let room = len - out.len();
        if room < 2 {
            break;
        }
        out.append(&random_parse_string(rng, 2, room.min(60)));
    }
    out
}

pub fn token_alphabet() -> Vec<Token> {
    PHRASES
        .iter()
        .chain(TAGS)
        .map(|l| Token::open(l))
        .chain([Token::Close])
        .collect()
}

/// Replaces `count` distinct positions with a different random token.
pub fn substitute<R: Rng>(rng: &mut R, ps: &ParseString, count: usize) -> ParseString {
    let alphabet = token_alphabet();
    let mut tokens = ps.tokens().to_vec();
    let picks = rand::seq::index::sample(rng, tokens.len(), count.min(tokens.len()));
    for i in picks {
        loop {
            let t = *alphabet.choose(rng).unwrap();
            if t != tokens[i] {
                tokens[i] = t;
                break;
            }
        }
    }
    ParseString::new(tokens)
}

/// Exponential recursion straight from the definition of edit distance.
pub fn recursive_distance(a: &[Token], b: &[Token]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => (recursive_distance(ra, rb) + usize::from(x != y))
            .min(recursive_distance(ra, b) + 1)
            .min(recursive_distance(a, rb) + 1),
    }
}

/// Quadratic full-table Levenshtein, written independently of the library.
pub fn table_distance(a: &[Token], b: &[Token]) -> usize {
    let mut d = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            d[i][j] = (d[i - 1][j - 1] + usize::from(a[i - 1] != b[j - 1]))
                .min(d[i - 1][j] + 1)
                .min(d[i][j - 1] + 1);
        }
    }
    d[a.len()][b.len()]
}
