//! Finite chains, tuples over them, order statistics and majority predicates.
//!
//! Everything downstream is verified against these functions: they are the
//! semantic ground truth for what a constructed term is supposed to compute.

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An element of the finite chain `0 < 1 < ... < d-1`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ChainValue(pub u8);

impl ChainValue {
    pub fn index(self) -> u8 {
        self.0
    }
}

impl std::fmt::Display for ChainValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A tuple over a fixed chain. All components are below `chain_size`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct ChainTuple {
    chain_size: u8,
    values: Vec<ChainValue>,
}

impl ChainTuple {
    pub fn new(chain_size: u8, values: Vec<ChainValue>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidParameter("tuple arity must be >= 1".into()));
        }
        for &v in &values {
            if v.0 >= chain_size {
                return Err(Error::DomainMismatch {
                    value: v.0,
                    chain_size,
                });
            }
        }
        Ok(ChainTuple { chain_size, values })
    }

    pub fn from_indices(chain_size: u8, indices: &[u8]) -> Result<Self> {
        Self::new(chain_size, indices.iter().map(|&i| ChainValue(i)).collect())
    }

    /// Decode the `index`-th tuple in lexicographic order (first component is
    /// the most significant digit of the mixed-radix number).
    pub fn from_rank(chain_size: u8, arity: usize, mut index: u64) -> Self {
        let d = chain_size as u64;
        let mut values = vec![ChainValue(0); arity];
        for slot in values.iter_mut().rev() {
            *slot = ChainValue((index % d) as u8);
            index /= d;
        }
        ChainTuple { chain_size, values }
    }

    /// Inverse of [`ChainTuple::from_rank`].
    pub fn rank(&self) -> u64 {
        let d = self.chain_size as u64;
        self.values.iter().fold(0u64, |acc, v| acc * d + v.0 as u64)
    }

    pub fn arity(&self) -> usize {
        self.values.len()
    }

    pub fn chain_size(&self) -> u8 {
        self.chain_size
    }

    pub fn values(&self) -> &[ChainValue] {
        &self.values
    }
}

impl std::fmt::Display for ChainTuple {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "({})",
            self.values.iter().map(|v| v.0.to_string()).join(",")
        )
    }
}

/// Number of tuples of the given arity, or an eval-budget error if it
/// exceeds `budget`.
pub fn tuple_count(chain_size: u8, arity: usize, budget: u64) -> Result<u64> {
    let mut count: u128 = 1;
    for _ in 0..arity {
        count *= chain_size as u128;
        if count > budget as u128 {
            return Err(Error::EvalBudget {
                needed: count,
                budget,
            });
        }
    }
    Ok(count as u64)
}

/// A total n-ary function on a finite chain, stored densely. The entry for a
/// tuple lives at its lexicographic rank ([`ChainTuple::rank`]).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FunctionTable {
    arity: usize,
    chain_size: u8,
    entries: Vec<ChainValue>,
}

impl FunctionTable {
    pub fn from_fn(
        arity: usize,
        chain_size: u8,
        mut f: impl FnMut(&ChainTuple) -> ChainValue,
    ) -> Result<Self> {
        let count = tuple_count(chain_size, arity, u64::MAX)?;
        let mut entries = Vec::with_capacity(count as usize);
        for rank in 0..count {
            let t = ChainTuple::from_rank(chain_size, arity, rank);
            let v = f(&t);
            if v.0 >= chain_size {
                return Err(Error::DomainMismatch {
                    value: v.0,
                    chain_size,
                });
            }
            entries.push(v);
        }
        Ok(FunctionTable {
            arity,
            chain_size,
            entries,
        })
    }

    /// The table of the order statistic of the given rank.
    pub fn order_statistic(arity: usize, rank: usize, chain_size: u8) -> Result<Self> {
        if rank < 1 || rank > arity {
            return Err(Error::InvalidRank { rank, arity });
        }
        Self::from_fn(arity, chain_size, |t| {
            order_statistic(t, rank).expect("rank checked")
        })
    }

    /// The table of the odd-arity median.
    pub fn median(arity: usize, chain_size: u8) -> Result<Self> {
        if arity.is_multiple_of(2) {
            return Err(Error::EvenArity(arity));
        }
        Self::order_statistic(arity, arity.div_ceil(2), chain_size)
    }

    /// A canonical majority function of any arity: the rank-⌈(n+1)/2⌉ order
    /// statistic (the median for odd n, the upper median for even n).
    pub fn true_majority(arity: usize, chain_size: u8) -> Result<Self> {
        Self::order_statistic(arity, (arity + 2) / 2, chain_size)
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn chain_size(&self) -> u8 {
        self.chain_size
    }

    pub fn apply(&self, t: &ChainTuple) -> Result<ChainValue> {
        if t.arity() != self.arity {
            return Err(Error::ArityMismatch {
                symbol: "table".into(),
                expected: self.arity,
                got: t.arity(),
            });
        }
        if t.chain_size() != self.chain_size {
            return Err(Error::DomainMismatch {
                value: t.chain_size(),
                chain_size: self.chain_size,
            });
        }
        Ok(self.entries[t.rank() as usize])
    }

    pub(crate) fn entry_at_rank(&self, rank: u64) -> ChainValue {
        self.entries[rank as usize]
    }
}

/// The k-th smallest component of the tuple, counting multiplicity.
/// `rank` 1 is the minimum, `rank` n the maximum.
pub fn order_statistic(t: &ChainTuple, rank: usize) -> Result<ChainValue> {
    if rank < 1 || rank > t.arity() {
        return Err(Error::InvalidRank {
            rank,
            arity: t.arity(),
        });
    }
    let mut sorted = t.values().to_vec();
    sorted.sort_unstable();
    Ok(sorted[rank - 1])
}

/// The middle order statistic of an odd-arity tuple.
pub fn median_odd(t: &ChainTuple) -> Result<ChainValue> {
    if t.arity().is_multiple_of(2) {
        return Err(Error::EvenArity(t.arity()));
    }
    order_statistic(t, t.arity().div_ceil(2))
}

/// The unique value occurring at least ⌈(n+1)/2⌉ times, if any.
pub fn majority_value(t: &ChainTuple) -> Option<ChainValue> {
    value_with_count(t, (t.arity() + 2) / 2) // ⌈(n+1)/2⌉
}

/// The value occurring at least `min_count` times, if any. Unique whenever
/// `min_count` is a strict majority of the arity.
pub fn value_with_count(t: &ChainTuple, min_count: usize) -> Option<ChainValue> {
    if min_count == 0 {
        return t.values().first().copied();
    }
    let mut counts = [0usize; 256];
    for v in t.values() {
        counts[v.0 as usize] += 1;
        if counts[v.0 as usize] >= min_count {
            return Some(*v);
        }
    }
    None
}

/// First tuple (lexicographically) on which the table violates the majority
/// property, or `None` if the table is a majority function.
pub fn majority_violation(f: &FunctionTable) -> Option<ChainTuple> {
    let count = tuple_count(f.chain_size(), f.arity(), u64::MAX).ok()?;
    for rank in 0..count {
        let t = ChainTuple::from_rank(f.chain_size(), f.arity(), rank);
        if let Some(m) = majority_value(&t) {
            if f.entry_at_rank(rank) != m {
                return Some(t);
            }
        }
    }
    None
}

pub fn is_majority_function(f: &FunctionTable) -> bool {
    majority_violation(f).is_none()
}

/// Order statistic in lattice form: the minimum over all k-element index
/// subsets of the maximum of the selected components. Agrees with
/// [`order_statistic`] on chains.
pub fn lattice_order_statistic(t: &ChainTuple, rank: usize) -> Result<ChainValue> {
    if rank < 1 || rank > t.arity() {
        return Err(Error::InvalidRank {
            rank,
            arity: t.arity(),
        });
    }
    let result = (0..t.arity())
        .combinations(rank)
        .map(|subset| subset.iter().map(|&i| t.values()[i]).max().unwrap())
        .min()
        .unwrap();
    Ok(result)
}
