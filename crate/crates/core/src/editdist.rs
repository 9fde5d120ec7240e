//! Token-level edit distance between parse strings.
//!
//! Unit-cost distances run through a bit-parallel (Myers/Hyyrö) kernel;
//! [`wagner_fischer`] is the plain row-by-row DP kept alongside it.

use std::collections::HashMap;

use crate::treebank::{ParseString, Token};

/// Per-operation costs. All paths that reproduce the published setup use
/// [`EditCosts::default`], i.e. unit costs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EditCosts {
    pub insert: f64,
    pub delete: f64,
    pub substitute: f64,
}

impl Default for EditCosts {
    fn default() -> Self {
        EditCosts {
            insert: 1.0,
            delete: 1.0,
            substitute: 1.0,
        }
    }
}

impl EditCosts {
    pub fn is_valid(&self) -> bool {
        [self.insert, self.delete, self.substitute]
            .iter()
            .all(|c| c.is_finite() && *c >= 0.0)
    }
}

/// Unit-cost edit distance.
pub fn edit_distance(a: &ParseString, b: &ParseString) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    Pattern::new(short.tokens()).distance(long.tokens())
}

/// Edit distance under arbitrary non-negative costs, transforming `a` into
/// `b` (insertions add tokens of `b`, deletions drop tokens of `a`).
pub fn weighted_edit_distance(a: &ParseString, b: &ParseString, costs: &EditCosts) -> f64 {
    let (a, b) = (a.tokens(), b.tokens());
    let mut prev: Vec<f64> = (0..=b.len()).map(|j| j as f64 * costs.insert).collect();
    let mut cur = vec![0.0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = (i + 1) as f64 * costs.delete;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + if x == y { 0.0 } else { costs.substitute };
            cur[j + 1] = sub
                .min(prev[j + 1] + costs.delete)
                .min(cur[j] + costs.insert);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Plain dynamic-programming Levenshtein distance over tokens, keeping one
/// row sized by the shorter input.
pub fn wagner_fischer(a: &[Token], b: &[Token]) -> usize {
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let mut stack = [0usize; 65];
    let mut heap = Vec::new();
    let row: &mut [usize] = if short.len() < stack.len() {
        &mut stack[..=short.len()]
    } else {
        heap.resize(short.len() + 1, 0);
        &mut heap
    };
    for (j, cell) in row.iter_mut().enumerate() {
        *cell = j;
    }
    for (i, y) in long.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, x) in short.iter().enumerate() {
            let above = row[j + 1];
            row[j + 1] = (diag + usize::from(x != y)).min(above + 1).min(row[j] + 1);
            diag = above;
        }
    }
    row[short.len()]
}

/// `edit_distance / max(|a|, |b|)`, with two empty strings at distance 0.
pub fn normalized_distance(a: &ParseString, b: &ParseString) -> f64 {
    let longest = a.len().max(b.len());
    if longest == 0 {
        return 0.0;
    }
    edit_distance(a, b) as f64 / longest as f64
}

pub fn similarity(a: &ParseString, b: &ParseString) -> f64 {
    1.0 - normalized_distance(a, b)
}

const WORD: usize = 64;

/// A token sequence preprocessed for repeated unit-cost distance queries.
///
/// Holds one match bitvector per distinct token (the `Peq` table of Myers'
/// algorithm), split into 64-row blocks.
#[derive(Debug, Clone)]
pub struct Pattern {
    len: usize,
    blocks: usize,
    /// token key -> row in `peq`
    rows: HashMap<u32, usize>,
    /// token key -> row + 1 for small keys, 0 when absent
    dense: Vec<u32>,
    peq: Vec<u64>,
}

const DENSE_LIMIT: u32 = 4096;

impl Pattern {
    pub fn new(tokens: &[Token]) -> Pattern {
        let len = tokens.len();
        let blocks = len.div_ceil(WORD).max(1);
        let mut rows = HashMap::new();
        let mut peq = Vec::new();
        for (i, token) in tokens.iter().enumerate() {
            let next = rows.len();
            let row = *rows.entry(token.key()).or_insert(next);
            if row == next {
                peq.resize(peq.len() + blocks, 0);
            }
            peq[row * blocks + i / WORD] |= 1 << (i % WORD);
        }
        let dense_len = rows
            .keys()
            .copied()
            .filter(|&k| k < DENSE_LIMIT)
            .max()
            .map_or(0, |k| k as usize + 1);
        let mut dense = vec![0u32; dense_len];
        for (&key, &row) in &rows {
            if key < DENSE_LIMIT {
                dense[key as usize] = row as u32 + 1;
            }
        }
        Pattern {
            len,
            blocks,
            rows,
            dense,
            peq,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn row(&self, token: Token) -> Option<usize> {
        let key = token.key();
        if key < DENSE_LIMIT {
            match self.dense.get(key as usize) {
                Some(&r) if r > 0 => Some(r as usize - 1),
                _ => None,
            }
        } else {
            self.rows.get(&key).copied()
        }
    }

    /// Unit-cost edit distance between this pattern and `text`.
    pub fn distance(&self, text: &[Token]) -> usize {
        if self.len == 0 {
            return text.len();
        }
        let blocks = self.blocks;
        let last = blocks - 1;
        let last_bit = 1u64 << ((self.len - 1) % WORD);
        let mut score = self.len as isize;
        if blocks == 1 {
            let (mut pv, mut mv) = (!0u64, 0u64);
            for &token in text {
                let eq = self.row(token).map_or(0, |r| self.peq[r]);
                score += advance_block(&mut pv, &mut mv, eq, 1, last_bit) as isize;
            }
            return score as usize;
        }
        let mut pv = vec![!0u64; blocks];
        let mut mv = vec![0u64; blocks];
        for &token in text {
            let row = self.row(token);
            // Row 0 of the DP table grows by one per text token.
            let mut carry = 1i8;
            for b in 0..blocks {
                let eq = row.map_or(0, |r| self.peq[r * blocks + b]);
                let high = if b == last { last_bit } else { 1 << (WORD - 1) };
                carry = advance_block(&mut pv[b], &mut mv[b], eq, carry, high);
            }
            score += carry as isize;
        }
        score as usize
    }
}

/// One column step for a 64-row block. `hin` is the horizontal delta
/// entering the block's top row; the return value is the delta leaving the
/// row selected by `high`.
#[inline]
fn advance_block(pv: &mut u64, mv: &mut u64, eq: u64, hin: i8, high: u64) -> i8 {
    let xv = eq | *mv;
    let eq = eq | u64::from(hin < 0);
    let xh = ((eq & *pv).wrapping_add(*pv) ^ *pv) | eq;
    let mut ph = *mv | !(xh | *pv);
    let mut mh = *pv & xh;
    let hout = if ph & high != 0 {
        1
    } else if mh & high != 0 {
        -1
    } else {
        0
    };
    ph <<= 1;
    mh <<= 1;
    if hin < 0 {
        mh |= 1;
    } else if hin > 0 {
        ph |= 1;
    }
    *pv = mh | !(xv | ph);
    *mv = ph & xv;
    hout
}
