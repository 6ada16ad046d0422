//! One executable builder per identification or boosting construction.
//!
//! Each function returns a [`Term`] witnessing that the target function lies
//! in the clone generated by the source symbol. The builders only produce
//! terms; the `verify` module is what confirms, by brute force over small
//! chains, that the terms compute what they are supposed to.

mod bounds;
mod plan;

pub use bounds::{
    boosting_bound, boosting_bound_with_steps, choose3, next_count, BoundSequence,
    DEFAULT_MAX_STEPS,
};
pub use plan::{materialize_plan, plan_medk_from_medn, Plan, Stage, StageKind};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::term::{make_application, make_variable, Symbol, Term, DEFAULT_NODE_BUDGET};

use itertools::Itertools;

/// Remainder of the division n/k.
pub fn remainder(n: u64, k: u64) -> Result<u64> {
    if k == 0 {
        return Err(Error::InvalidParameter("division by zero".into()));
    }
    Ok(n % k)
}

/// n is almost divisible by k iff R(n/k) <= n/k or (k-1) - R(n/k) <= n/k.
/// The inequalities are over the rationals: R <= n/k iff R*k <= n.
pub fn almost_divisible(n: u64, k: u64) -> Result<bool> {
    let r = remainder(n, k)?;
    Ok(r * k <= n || ((k - 1) - r) * k <= n)
}

/// Which clause of almost divisibility failed, for error messages.
fn almost_divisible_failure(n: u64, k: u64) -> String {
    let r = n % k;
    format!(
        "{n} is not almost divisible by {k}: R={r} with R*{k}={} > {n} and (({k}-1)-R)*{k}={} > {n}",
        r * k,
        ((k - 1) - r) * k
    )
}

/// Variables v0..v_{count-1}, each repeated per `multiplicities`.
fn repeated_variables(multiplicities: &[u64]) -> Vec<Term> {
    let mut children = Vec::new();
    for (j, &m) in multiplicities.iter().enumerate() {
        for _ in 0..m {
            children.push(make_variable(j));
        }
    }
    children
}

/// Multiplicity vector for identifying k variables into an n-tuple:
/// variable j (1-indexed) occurs ⌊n/k⌋+1 times if j <= R(n/k), else ⌊n/k⌋.
pub fn identification_multiplicities(n: u64, k: u64) -> Vec<u64> {
    let q = n / k;
    let r = n % k;
    (1..=k).map(|j| if j <= r { q + 1 } else { q }).collect()
}

/// med_k as a single identification of variables in med_n. Requires both
/// arities odd, k <= n, and n almost divisible by k.
pub fn identify_median(n: u64, k: u64) -> Result<Term> {
    if n.is_multiple_of(2) || k.is_multiple_of(2) || k < 1 {
        return Err(Error::NotApplicable(format!(
            "identification needs odd arities, got n={n}, k={k}"
        )));
    }
    if k > n {
        return Err(Error::NotApplicable(format!(
            "target arity {k} exceeds source arity {n}"
        )));
    }
    if !almost_divisible(n, k)? {
        return Err(Error::NotApplicable(almost_divisible_failure(n, k)));
    }
    let children = repeated_variables(&identification_multiplicities(n, k));
    make_application(Symbol::median(n as usize)?, children)
}

/// med_3(x1,x2,x3) = med_n(x1, x2,...,x2, x3,...,x3) with x2 and x3 each
/// occurring (n-1)/2 times.
pub fn med3_from_medn(n: u64) -> Result<Term> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(Error::InvalidParameter(format!(
            "source arity must be odd and >= 3, got {n}"
        )));
    }
    let half = (n - 1) / 2;
    let children = repeated_variables(&[1, half, half]);
    make_application(Symbol::median(n as usize)?, children)
}

/// A ternary majority function by identification of variables in any n-ary
/// majority function, n >= 5.
pub fn maj3_from_majn(oracle: &Symbol) -> Result<Term> {
    let n = oracle.arity() as u64;
    if n < 5 {
        return Err(Error::NotApplicable(format!(
            "ternary extraction needs arity >= 5, got {n}"
        )));
    }
    let children = repeated_variables(&identification_multiplicities(n, 3));
    make_application(oracle.clone(), children)
}

/// maj_n(x1,...,xn) = maj_{n+1}(x1,...,xn,xn) for even n.
pub fn even_majority_from_odd(oracle: &Symbol) -> Result<Term> {
    let m = oracle.arity();
    if m < 3 || m.is_multiple_of(2) {
        return Err(Error::NotApplicable(format!(
            "need an odd oracle arity >= 3, got {m}"
        )));
    }
    let n = m - 1;
    let mut children: Vec<Term> = (0..n).map(make_variable).collect();
    children.push(make_variable(n - 1));
    make_application(oracle.clone(), children)
}

/// An n-ary majority function as a depth-three term over an (n-2)-ary one.
///
/// For 2 <= j <= n-1 and 1 <= i <= n-1 with i != j, the inner term γ_i^j
/// drops x_i and x_{i+1} when j != i+1, and x_i and x_{i+2} when j = i+1.
/// Then z_j applies the oracle to the γ_i^j in increasing i, and the result
/// applies it to z_2,...,z_{n-1}.
///
/// For odd n the result satisfies the full majority property whenever the
/// oracle does. For even n the guarantee is weaker: the result returns the
/// leading value whenever it occurs at least n/2 + 2 times, but can miss it
/// on boundary tuples where it occurs exactly n/2 + 1 times (already against
/// the true order-statistic oracle, e.g. n = 6 on (0,0,0,0,1,1)). This is
/// not fixable by a cleverer term: no term over an even-arity majority
/// oracle, of any depth, closes the gap — see
/// `even_boost_margin_is_unavoidable` in the tests for a machine-checked
/// proof.
pub fn boost_majority_by_two(oracle: &Symbol) -> Result<Term> {
    let m = oracle.arity();
    let n = m + 2;
    if n < 5 {
        return Err(Error::NotApplicable(format!(
            "boosting needs a target arity >= 5, got {n}"
        )));
    }
    // 1-indexed positions throughout; variable x_t is make_variable(t-1)
    let gamma = |i: usize, j: usize| -> Result<Term> {
        let dropped = if j == i + 1 { [i, i + 2] } else { [i, i + 1] };
        let children: Vec<Term> = (1..=n)
            .filter(|t| !dropped.contains(t))
            .map(|t| make_variable(t - 1))
            .collect();
        make_application(oracle.clone(), children)
    };
    let mut zs = Vec::with_capacity(n - 2);
    for j in 2..=n - 1 {
        let gammas = (1..=n - 1)
            .filter(|&i| i != j)
            .map(|i| gamma(i, j))
            .collect::<Result<Vec<_>>>()?;
        zs.push(make_application(oracle.clone(), gammas)?);
    }
    make_application(oracle.clone(), zs)
}

/// One step in a chain of majority-arity transformations.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MajorityStep {
    /// Arity m -> m+2 via [`boost_majority_by_two`].
    BoostByTwo,
    /// Arity m -> m-1 by duplicating the last variable.
    DropLast,
    /// Arity m -> 3 via [`maj3_from_majn`].
    ExtractTernary,
    /// Arity 4 -> 6 via [`boost_majority_by_two`].
    FourToSix,
}

/// The step sequence taking an n-ary majority function to a k-ary one:
/// odd sources climb to odd targets by boosting, even targets come from one
/// arity above via a drop, every other case goes through a ternary
/// extraction, and a 4-ary source goes through arity 6 first.
///
/// Boosting is only scheduled from odd arities, where it preserves the full
/// majority property. An even source of arity >= 6 is routed through the
/// (exact) ternary extraction instead. Only the 4-ary source has no exact
/// route at all (see [`boost_majority_by_two`]); its chain starts with the
/// margin-losing [`MajorityStep::FourToSix`].
pub fn majority_chain_steps(n: u64, k: u64) -> Result<Vec<MajorityStep>> {
    if n < 3 || k < 3 {
        return Err(Error::InvalidParameter(format!(
            "majority arities must be >= 3, got n={n}, k={k}"
        )));
    }
    if k == n {
        return Ok(vec![]);
    }
    if k >= n && (k - n).is_multiple_of(2) && n % 2 == 1 {
        return Ok(vec![MajorityStep::BoostByTwo; ((k - n) / 2) as usize]);
    }
    if k.is_multiple_of(2) && n % 2 == 1 {
        let mut steps = majority_chain_steps(n, k + 1)?;
        steps.push(MajorityStep::DropLast);
        return Ok(steps);
    }
    if n >= 5 {
        let mut steps = vec![MajorityStep::ExtractTernary];
        steps.extend(majority_chain_steps(3, k)?);
        return Ok(steps);
    }
    // n == 4 is the only remaining source
    let mut steps = vec![MajorityStep::FourToSix];
    steps.extend(majority_chain_steps(6, k)?);
    Ok(steps)
}

/// A k-ary majority term over the given majority symbol, materialized under
/// the node budget. The estimate is checked before each boost so a single
/// step cannot blow past the budget by orders of magnitude.
///
/// The result satisfies the full majority property whenever the oracle does,
/// except for a 4-ary oracle: that chain opens with the 4 -> 6 step, whose
/// output only guarantees the leading value when it has at least two spare
/// occurrences (see [`boost_majority_by_two`]).
pub fn majority_any_arity(oracle: &Symbol, k: u64, node_budget: u64) -> Result<Term> {
    let n = oracle.arity() as u64;
    let steps = majority_chain_steps(n, k)?;
    let mut term = make_application(
        oracle.clone(),
        (0..oracle.arity()).map(make_variable).collect(),
    )?;
    let mut arity = oracle.arity();
    for step in steps {
        match step {
            MajorityStep::BoostByTwo | MajorityStep::FourToSix => {
                let target = arity + 2;
                let apps = ((target - 2) * (target - 2) + (target - 2) + 1) as u64;
                let estimate = apps.saturating_mul(term.node_count());
                if estimate > node_budget {
                    return Err(Error::NodeBudget {
                        needed: estimate,
                        budget: node_budget,
                    });
                }
                let placeholder = Symbol::oracle("_chain", arity)?;
                let boosted = boost_majority_by_two(&placeholder)?;
                term = boosted.expand_symbol(&placeholder, &term)?;
                arity = target;
            }
            MajorityStep::DropLast => {
                let mut map: HashMap<usize, Term> =
                    (0..arity - 1).map(|i| (i, make_variable(i))).collect();
                map.insert(arity - 1, make_variable(arity - 2));
                term = term.substitute(&map)?;
                arity -= 1;
            }
            MajorityStep::ExtractTernary => {
                let placeholder = Symbol::oracle("_chain", arity)?;
                let extracted = maj3_from_majn(&placeholder)?;
                term = extracted.expand_symbol(&placeholder, &term)?;
                arity = 3;
            }
        }
        if term.node_count() > node_budget {
            return Err(Error::NodeBudget {
                needed: term.node_count(),
                budget: node_budget,
            });
        }
    }
    Ok(term)
}

/// One med_3 application per 3-element subset of {0..width-1}, in
/// lexicographic subset order.
pub fn cascade_step_term(width: u64, node_budget: u64) -> Result<Vec<Term>> {
    if width < 3 {
        return Err(Error::InvalidParameter(format!(
            "cascade width must be >= 3, got {width}"
        )));
    }
    let count = width * (width - 1) * (width - 2) / 6;
    if count.saturating_add(width) > node_budget {
        return Err(Error::NodeBudget {
            needed: count + width,
            budget: node_budget,
        });
    }
    let med3 = Symbol::median(3)?;
    (0..width as usize)
        .combinations(3)
        .map(|subset| {
            make_application(
                med3.clone(),
                subset.into_iter().map(make_variable).collect(),
            )
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExtremumKind {
    Min,
    Max,
}

impl std::fmt::Display for ExtremumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtremumKind::Min => write!(f, "min"),
            ExtremumKind::Max => write!(f, "max"),
        }
    }
}

/// min_2 or max_2 as an identification of two variables in m^n_k: x occurs
/// ⌊n/2⌋ times, y fills the rest. Applicable for 2 <= k <= ⌊n/2⌋ (min) and
/// ⌈n/2⌉ < k < n (max).
pub fn nonminimality_witness(n: u64, k: u64) -> Result<(Term, ExtremumKind)> {
    if n < 4 || k < 1 || k > n {
        return Err(Error::NotApplicable(format!(
            "witness needs n >= 4 and 1 <= k <= n, got n={n}, k={k}"
        )));
    }
    let kind = if 2 <= k && k <= n / 2 {
        ExtremumKind::Min
    } else if k > n.div_ceil(2) && k < n {
        ExtremumKind::Max
    } else {
        return Err(Error::NotApplicable(format!(
            "rank {k} of arity {n} is a minimum, maximum or median rank"
        )));
    };
    let half = n / 2;
    let children = repeated_variables(&[half, n - half]);
    let term = make_application(Symbol::order_statistic(n as usize, k as usize)?, children)?;
    Ok((term, kind))
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MinimalKind {
    Min,
    Max,
    Median,
}

impl std::fmt::Display for MinimalKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MinimalKind::Min => write!(f, "min"),
            MinimalKind::Max => write!(f, "max"),
            MinimalKind::Median => write!(f, "median"),
        }
    }
}

#[derive(Clone, Debug)]
pub enum Classification {
    Minimal(MinimalKind),
    NotMinimal { witness: Term, kind: ExtremumKind },
}

/// m^n_k is minimal iff k = 1, k = n, or n is odd and k = (n+1)/2. The
/// non-minimal cases carry a min_2 / max_2 witness.
pub fn classify_mnk(n: u64, k: u64) -> Result<Classification> {
    if n < 2 || k < 1 || k > n {
        return Err(Error::InvalidParameter(format!(
            "need n >= 2 and 1 <= k <= n, got n={n}, k={k}"
        )));
    }
    if k == 1 {
        return Ok(Classification::Minimal(MinimalKind::Min));
    }
    if k == n {
        return Ok(Classification::Minimal(MinimalKind::Max));
    }
    if n % 2 == 1 && k == n.div_ceil(2) {
        return Ok(Classification::Minimal(MinimalKind::Median));
    }
    let (witness, kind) = nonminimality_witness(n, k)?;
    Ok(Classification::NotMinimal { witness, kind })
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HalfMedian {
    Lower,
    Upper,
}

/// med_3 by identification of variables in the lower or upper median of an
/// even arity n >= 6. Fails for n = 4, which cannot generate the medians.
pub fn med3_from_half_median(n: u64, which: HalfMedian) -> Result<Term> {
    if n % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "half medians are defined for even arity, got {n}"
        )));
    }
    if n == 4 {
        return Err(Error::NotApplicable(
            "the 4-ary half medians cannot generate the medians".into(),
        ));
    }
    if n < 6 {
        return Err(Error::InvalidParameter(format!(
            "need even arity >= 6, got {n}"
        )));
    }
    let rank = match which {
        HalfMedian::Lower => n / 2,
        HalfMedian::Upper => n / 2 + 1,
    };
    let children = repeated_variables(&identification_multiplicities(n, 3));
    make_application(
        Symbol::order_statistic(n as usize, rank as usize)?,
        children,
    )
}

/// Shared default budget, re-exported for convenience.
pub fn default_node_budget() -> u64 {
    DEFAULT_NODE_BUDGET
}
