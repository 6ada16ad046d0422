//! Exact-rational frequency sequences for the med_3 cascade.
//!
//! Starting from a single occurrence of the true median in an n-tuple, each
//! cascade step applies med_3 to all 3-element selections. `n_seq` tracks the
//! tuple widths, `k_seq` the worst-case count of median occurrences, and
//! `r_seq = k/n` the relative frequency. The bound `b` is the width at which
//! the frequency first exceeds 1/2, so a b-ary majority function recovers
//! the median.

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

pub const DEFAULT_MAX_STEPS: usize = 64;

#[derive(Clone, Debug)]
pub struct BoundSequence {
    /// Tuple widths n_0, n_1, ..., n_{j*}.
    pub n_seq: Vec<BigUint>,
    /// Worst-case median occurrence counts k_0, ..., k_{j*} (exact rationals;
    /// integrality is expected but only asserted as a warning).
    pub k_seq: Vec<BigRational>,
    /// Relative frequencies r_j = k_j / n_j.
    pub r_seq: Vec<BigRational>,
    /// First index with r_j > 1/2.
    pub stop_index: usize,
    /// b = n_{j*}: the majority arity that recovers the median.
    pub bound: BigUint,
    /// Steps at which k_j failed to be an integer, if any.
    pub integrality_warnings: Vec<usize>,
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn rat_int(n: &BigUint) -> BigRational {
    BigRational::from_integer(n.clone().into())
}

/// C(n, 3) over the naturals.
pub fn choose3(n: &BigUint) -> BigUint {
    if *n < big(3) {
        return BigUint::zero();
    }
    n * (n - 1u32) * (n - 2u32) / big(6)
}

/// C(q, 3) = q(q-1)(q-2)/6 extended to rationals.
fn choose3_rat(q: &BigRational) -> BigRational {
    let one = BigRational::one();
    q * (q - &one) * (q - &one - &one) / BigRational::from_integer(6.into())
}

/// C(q, 2) = q(q-1)/2 extended to rationals.
fn choose2_rat(q: &BigRational) -> BigRational {
    let one = BigRational::one();
    q * (q - &one) / BigRational::from_integer(2.into())
}

/// One cascade step of the occurrence recurrence:
/// k' = C(k,3) + C(k,2)(n-k) + k((n-k)/2)^2.
pub fn next_count(n: &BigUint, k: &BigRational) -> BigRational {
    let n = rat_int(n);
    let gap = &n - k;
    let half_gap = &gap / BigRational::from_integer(2.into());
    choose3_rat(k) + choose2_rat(k) * &gap + k * &half_gap * &half_gap
}

pub fn boosting_bound(n: u64) -> Result<BoundSequence> {
    boosting_bound_with_steps(n, DEFAULT_MAX_STEPS)
}

pub fn boosting_bound_with_steps(n: u64, max_steps: usize) -> Result<BoundSequence> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "cascade start arity must be odd and >= 3, got {n}"
        )));
    }
    let half = BigRational::new(1.into(), 2.into());
    let mut n_seq = vec![big(n)];
    let mut k_seq = vec![BigRational::one()];
    let mut r_seq = vec![BigRational::new(1.into(), n.into())];
    let mut integrality_warnings = Vec::new();

    for j in 0..=max_steps {
        if r_seq[j] > half {
            return Ok(BoundSequence {
                bound: n_seq[j].clone(),
                stop_index: j,
                n_seq,
                k_seq,
                r_seq,
                integrality_warnings,
            });
        }
        if j == max_steps {
            break;
        }
        let next_n = choose3(&n_seq[j]);
        let next_k = next_count(&n_seq[j], &k_seq[j]);
        if !next_k.denom().is_one() {
            integrality_warnings.push(j + 1);
        }
        r_seq.push(&next_k / rat_int(&next_n));
        n_seq.push(next_n);
        k_seq.push(next_k);
    }
    Err(Error::Divergence(max_steps))
}
