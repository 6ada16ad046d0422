//! Bit-parallel evaluation over the two-element chain.
//!
//! Every variable is a machine-word-packed vector of its value across all
//! 2^arity assignments; the median of three is two ANDs short of free, and
//! general order statistics reduce to threshold counting on packed bits.

use std::collections::HashMap;

use super::{Node, OracleBindings, Symbol, Term, DEFAULT_BOOLEAN_ARITY_LIMIT};
use crate::error::{Error, Result};

/// The value of a term on every 0/1 assignment. Bit `a` is the value under
/// the assignment where variable `i` is `(a >> i) & 1`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TruthTable {
    arity: usize,
    words: Vec<u64>,
}

impl TruthTable {
    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn assignments(&self) -> u64 {
        1u64 << self.arity
    }

    pub fn bit(&self, assignment: u64) -> u8 {
        ((self.words[(assignment / 64) as usize] >> (assignment % 64)) & 1) as u8
    }
}

fn word_count(arity: usize) -> usize {
    if arity < 6 {
        1
    } else {
        1usize << (arity - 6)
    }
}

fn tail_mask(arity: usize) -> u64 {
    if arity < 6 {
        (1u64 << (1usize << arity)) - 1
    } else {
        u64::MAX
    }
}

fn variable_vector(index: usize, arity: usize) -> Vec<u64> {
    // For i < 6 the pattern repeats inside a word; beyond that it is
    // constant per word.
    const IN_WORD: [u64; 6] = [
        0xAAAA_AAAA_AAAA_AAAA,
        0xCCCC_CCCC_CCCC_CCCC,
        0xF0F0_F0F0_F0F0_F0F0,
        0xFF00_FF00_FF00_FF00,
        0xFFFF_0000_FFFF_0000,
        0xFFFF_FFFF_0000_0000,
    ];
    let words = word_count(arity);
    let mask = tail_mask(arity);
    if index < 6 {
        let mut v = vec![IN_WORD[index]; words];
        v[words - 1] &= mask;
        v
    } else {
        (0..words as u64)
            .map(|w| {
                if (w >> (index - 6)) & 1 == 1 {
                    u64::MAX
                } else {
                    0
                }
            })
            .collect()
    }
}

/// Packed vectors of positions where at least `threshold` of the children
/// are 1.
fn threshold_vector(children: &[Vec<u64>], threshold: usize, words: usize) -> Vec<u64> {
    let mut at_least: Vec<Vec<u64>> = Vec::with_capacity(threshold + 1);
    at_least.push(vec![u64::MAX; words]);
    for _ in 0..threshold {
        at_least.push(vec![0u64; words]);
    }
    for child in children {
        for c in (1..=threshold).rev() {
            for w in 0..words {
                at_least[c][w] |= at_least[c - 1][w] & child[w];
            }
        }
    }
    at_least.pop().unwrap()
}

pub fn evaluate_all_boolean(t: &Term, oracles: &OracleBindings) -> Result<TruthTable> {
    evaluate_all_boolean_with_limit(t, oracles, DEFAULT_BOOLEAN_ARITY_LIMIT)
}

pub fn evaluate_all_boolean_with_limit(
    t: &Term,
    oracles: &OracleBindings,
    limit: usize,
) -> Result<TruthTable> {
    let arity = t.arity();
    if arity > limit {
        return Err(Error::BooleanArityLimit { arity, limit });
    }
    let words = word_count(arity);
    let mut memo: HashMap<u64, Vec<u64>> = HashMap::new();
    let bits = eval_packed(t, arity, words, oracles, &mut memo)?;
    Ok(TruthTable { arity, words: bits })
}

fn eval_packed(
    t: &Term,
    arity: usize,
    words: usize,
    oracles: &OracleBindings,
    memo: &mut HashMap<u64, Vec<u64>>,
) -> Result<Vec<u64>> {
    if let Some(v) = memo.get(&t.id()) {
        return Ok(v.clone());
    }
    let result = match t.node() {
        Node::Variable(i) => variable_vector(*i, arity),
        Node::Application(symbol, children) => {
            let vecs = children
                .iter()
                .map(|c| eval_packed(c, arity, words, oracles, memo))
                .collect::<Result<Vec<_>>>()?;
            match symbol {
                Symbol::OrderStatistic { arity: n, rank } => {
                    // k-th smallest bit is 1 iff at least n-k+1 ones
                    threshold_vector(&vecs, n - rank + 1, words)
                }
                Symbol::Median { arity: n } => threshold_vector(&vecs, n.div_ceil(2), words),
                Symbol::Oracle { name, arity: n } => {
                    let table = oracles
                        .get(name)
                        .ok_or_else(|| Error::UnboundOracle(name.clone()))?;
                    if table.arity() != *n {
                        return Err(Error::OracleArityMismatch {
                            name: name.clone(),
                            table_arity: table.arity(),
                            symbol_arity: *n,
                        });
                    }
                    if table.chain_size() != 2 {
                        return Err(Error::DomainMismatch {
                            value: table.chain_size(),
                            chain_size: 2,
                        });
                    }
                    let mut out = vec![0u64; words];
                    let total = 1u64 << arity;
                    for a in 0..total {
                        let mut rank = 0u64;
                        for v in &vecs {
                            let bit = (v[(a / 64) as usize] >> (a % 64)) & 1;
                            rank = rank * 2 + bit;
                        }
                        if table.entry_at_rank(rank).0 == 1 {
                            out[(a / 64) as usize] |= 1u64 << (a % 64);
                        }
                    }
                    out
                }
            }
        }
    };
    // keep bits beyond 2^arity zeroed so table equality is well defined
    let mut result = result;
    if arity < 6 {
        result[0] &= tail_mask(arity);
    }
    memo.insert(t.id(), result.clone());
    Ok(result)
}
