//! Hash-consed term DAGs over order-statistic, median and oracle symbols,
//! with a memoizing chain evaluator.
//!
//! Terms are the composition witnesses: every construction in this crate
//! produces one. Structurally identical subterms share a single canonical
//! node, so evaluation is linear in unique nodes rather than tree size.

mod boolean;
mod sexpr;

pub use boolean::{evaluate_all_boolean, evaluate_all_boolean_with_limit, TruthTable};
pub use sexpr::{parse_term, print_term};

use std::collections::{HashMap, HashSet};
use std::sync::{Arc, Mutex, OnceLock};

use crate::chain::{order_statistic, ChainTuple, ChainValue, FunctionTable};
use crate::error::{Error, Result};

/// The default cap on term arity for the bit-parallel Boolean evaluator.
pub const DEFAULT_BOOLEAN_ARITY_LIMIT: usize = 20;

/// Default cap on unique DAG nodes a construction may materialize.
pub const DEFAULT_NODE_BUDGET: u64 = 1_000_000;

/// A named function symbol with built-in or oracle semantics.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Symbol {
    /// `mnk:<n>:<k>` — the k-th order statistic of n arguments.
    OrderStatistic { arity: usize, rank: usize },
    /// `med<n>` — the median of an odd number of arguments.
    Median { arity: usize },
    /// `oracle:<name>:<arity>` — resolved against [`OracleBindings`] at
    /// evaluation time.
    Oracle { name: String, arity: usize },
}

impl Symbol {
    pub fn median(arity: usize) -> Result<Self> {
        if arity < 1 || arity.is_multiple_of(2) {
            return Err(Error::EvenArity(arity));
        }
        Ok(Symbol::Median { arity })
    }

    pub fn order_statistic(arity: usize, rank: usize) -> Result<Self> {
        if arity < 1 {
            return Err(Error::InvalidParameter("symbol arity must be >= 1".into()));
        }
        if rank < 1 || rank > arity {
            return Err(Error::InvalidRank { rank, arity });
        }
        Ok(Symbol::OrderStatistic { arity, rank })
    }

    pub fn oracle(name: &str, arity: usize) -> Result<Self> {
        if arity < 1 {
            return Err(Error::InvalidParameter("symbol arity must be >= 1".into()));
        }
        if name.is_empty()
            || name
                .chars()
                .any(|c| c == ':' || c == '(' || c == ')' || c.is_whitespace())
        {
            return Err(Error::InvalidParameter(format!(
                "invalid oracle name `{name}`"
            )));
        }
        Ok(Symbol::Oracle {
            name: name.to_string(),
            arity,
        })
    }

    pub fn arity(&self) -> usize {
        match self {
            Symbol::OrderStatistic { arity, .. } => *arity,
            Symbol::Median { arity } => *arity,
            Symbol::Oracle { arity, .. } => *arity,
        }
    }

    /// The serialized symbol name.
    pub fn name(&self) -> String {
        match self {
            Symbol::OrderStatistic { arity, rank } => format!("mnk:{arity}:{rank}"),
            Symbol::Median { arity } => format!("med{arity}"),
            Symbol::Oracle { name, arity } => format!("oracle:{name}:{arity}"),
        }
    }
}

impl std::fmt::Display for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

#[derive(Debug)]
pub enum Node {
    Variable(usize),
    Application(Symbol, Vec<Term>),
}

struct TermData {
    id: u64,
    node: Node,
    arity: usize,
    depth: usize,
}

/// A canonical, immutable term. Cloning is cheap; equality is node identity.
#[derive(Clone)]
pub struct Term(Arc<TermData>);

impl PartialEq for Term {
    fn eq(&self, other: &Self) -> bool {
        self.0.id == other.0.id
    }
}
impl Eq for Term {}
impl std::hash::Hash for Term {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.0.id.hash(state);
    }
}

#[derive(PartialEq, Eq, Hash)]
enum NodeKey {
    Variable(usize),
    Application(Symbol, Vec<u64>),
}

struct Interner {
    nodes: HashMap<NodeKey, Term>,
    next_id: u64,
}

fn interner() -> &'static Mutex<Interner> {
    static INTERNER: OnceLock<Mutex<Interner>> = OnceLock::new();
    INTERNER.get_or_init(|| {
        Mutex::new(Interner {
            nodes: HashMap::new(),
            next_id: 0,
        })
    })
}

/// The i-th projection as a term.
pub fn make_variable(index: usize) -> Term {
    let key = NodeKey::Variable(index);
    let mut guard = interner().lock().unwrap();
    if let Some(t) = guard.nodes.get(&key) {
        return t.clone();
    }
    let id = guard.next_id;
    guard.next_id += 1;
    let term = Term(Arc::new(TermData {
        id,
        node: Node::Variable(index),
        arity: index + 1,
        depth: 0,
    }));
    guard.nodes.insert(key, term.clone());
    term
}

/// Apply a symbol to children. Fails unless the child count matches the
/// symbol arity. Building the same structure twice yields the same node.
pub fn make_application(symbol: Symbol, children: Vec<Term>) -> Result<Term> {
    if children.len() != symbol.arity() {
        return Err(Error::ArityMismatch {
            symbol: symbol.name(),
            expected: symbol.arity(),
            got: children.len(),
        });
    }
    let key = NodeKey::Application(symbol.clone(), children.iter().map(|c| c.id()).collect());
    let mut guard = interner().lock().unwrap();
    if let Some(t) = guard.nodes.get(&key) {
        return Ok(t.clone());
    }
    let arity = children.iter().map(|c| c.arity()).max().unwrap_or(0);
    let depth = 1 + children.iter().map(|c| c.depth()).max().unwrap_or(0);
    let id = guard.next_id;
    guard.next_id += 1;
    let term = Term(Arc::new(TermData {
        id,
        node: Node::Application(symbol, children),
        arity,
        depth,
    }));
    guard.nodes.insert(key, term.clone());
    Ok(term)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TermStats {
    pub arity: usize,
    pub node_count: u64,
    pub depth: usize,
}

impl Term {
    pub fn id(&self) -> u64 {
        self.0.id
    }

    pub fn node(&self) -> &Node {
        &self.0.node
    }

    /// One more than the largest variable index occurring in the term.
    pub fn arity(&self) -> usize {
        self.0.arity
    }

    /// Application nesting depth; a bare variable has depth 0.
    pub fn depth(&self) -> usize {
        self.0.depth
    }

    /// Number of unique DAG nodes reachable from this term.
    pub fn node_count(&self) -> u64 {
        let mut seen = HashSet::new();
        let mut stack = vec![self.clone()];
        while let Some(t) = stack.pop() {
            if !seen.insert(t.id()) {
                continue;
            }
            if let Node::Application(_, children) = t.node() {
                stack.extend(children.iter().cloned());
            }
        }
        seen.len() as u64
    }

    pub fn stats(&self) -> TermStats {
        TermStats {
            arity: self.arity(),
            node_count: self.node_count(),
            depth: self.depth(),
        }
    }

    /// Simultaneous substitution of terms for variables. Every variable of
    /// the term must have a replacement; sharing is preserved.
    pub fn substitute(&self, replacement: &HashMap<usize, Term>) -> Result<Term> {
        let mut memo: HashMap<u64, Term> = HashMap::new();
        self.substitute_memo(replacement, &mut memo)
    }

    fn substitute_memo(
        &self,
        replacement: &HashMap<usize, Term>,
        memo: &mut HashMap<u64, Term>,
    ) -> Result<Term> {
        if let Some(t) = memo.get(&self.id()) {
            return Ok(t.clone());
        }
        let result = match self.node() {
            Node::Variable(i) => replacement
                .get(i)
                .cloned()
                .ok_or(Error::MissingReplacement(*i))?,
            Node::Application(symbol, children) => {
                let new_children = children
                    .iter()
                    .map(|c| c.substitute_memo(replacement, memo))
                    .collect::<Result<Vec<_>>>()?;
                make_application(symbol.clone(), new_children)?
            }
        };
        memo.insert(self.id(), result.clone());
        Ok(result)
    }

    /// Replace every application of `symbol` by `body`, with the children
    /// substituted for the body's variables. This is how a term built over a
    /// placeholder oracle gets composed with the term realizing that oracle.
    pub fn expand_symbol(&self, symbol: &Symbol, body: &Term) -> Result<Term> {
        if body.arity() > symbol.arity() {
            return Err(Error::ArityMismatch {
                symbol: symbol.name(),
                expected: symbol.arity(),
                got: body.arity(),
            });
        }
        let mut memo: HashMap<u64, Term> = HashMap::new();
        self.expand_memo(symbol, body, &mut memo)
    }

    fn expand_memo(
        &self,
        symbol: &Symbol,
        body: &Term,
        memo: &mut HashMap<u64, Term>,
    ) -> Result<Term> {
        if let Some(t) = memo.get(&self.id()) {
            return Ok(t.clone());
        }
        let result = match self.node() {
            Node::Variable(_) => self.clone(),
            Node::Application(s, children) => {
                let new_children = children
                    .iter()
                    .map(|c| c.expand_memo(symbol, body, memo))
                    .collect::<Result<Vec<_>>>()?;
                if s == symbol {
                    let map: HashMap<usize, Term> = new_children.into_iter().enumerate().collect();
                    body.substitute(&map)?
                } else {
                    make_application(s.clone(), new_children)?
                }
            }
        };
        memo.insert(self.id(), result.clone());
        Ok(result)
    }
}

impl std::fmt::Debug for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", print_term(self))
    }
}

impl std::fmt::Display for Term {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", print_term(self))
    }
}

/// One chain value per variable index.
#[derive(Clone, Debug)]
pub struct Assignment {
    chain_size: u8,
    values: Vec<ChainValue>,
}

impl Assignment {
    pub fn new(chain_size: u8, values: Vec<ChainValue>) -> Result<Self> {
        for &v in &values {
            if v.0 >= chain_size {
                return Err(Error::DomainMismatch {
                    value: v.0,
                    chain_size,
                });
            }
        }
        Ok(Assignment { chain_size, values })
    }

    pub fn from_tuple(t: &ChainTuple) -> Self {
        Assignment {
            chain_size: t.chain_size(),
            values: t.values().to_vec(),
        }
    }

    pub fn chain_size(&self) -> u8 {
        self.chain_size
    }

    pub fn value(&self, variable: usize) -> Option<ChainValue> {
        self.values.get(variable).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Function tables standing in for oracle symbols, keyed by oracle name.
#[derive(Clone, Default, Debug)]
pub struct OracleBindings {
    tables: HashMap<String, FunctionTable>,
}

impl OracleBindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn bind(mut self, name: &str, table: FunctionTable) -> Self {
        self.tables.insert(name.to_string(), table);
        self
    }

    pub fn get(&self, name: &str) -> Option<&FunctionTable> {
        self.tables.get(name)
    }
}

/// Bottom-up evaluation with memoization over shared nodes.
pub fn evaluate(t: &Term, a: &Assignment, oracles: &OracleBindings) -> Result<ChainValue> {
    if a.len() < t.arity() {
        return Err(Error::AssignmentTooShort {
            required: t.arity(),
            provided: a.len(),
        });
    }
    let mut memo: HashMap<u64, ChainValue> = HashMap::new();
    eval_memo(t, a, oracles, &mut memo)
}

fn eval_memo(
    t: &Term,
    a: &Assignment,
    oracles: &OracleBindings,
    memo: &mut HashMap<u64, ChainValue>,
) -> Result<ChainValue> {
    if let Some(&v) = memo.get(&t.id()) {
        return Ok(v);
    }
    let value = match t.node() {
        Node::Variable(i) => a.value(*i).ok_or(Error::AssignmentTooShort {
            required: *i + 1,
            provided: a.len(),
        })?,
        Node::Application(symbol, children) => {
            let mut vals = Vec::with_capacity(children.len());
            for c in children {
                vals.push(eval_memo(c, a, oracles, memo)?);
            }
            apply_symbol(symbol, &vals, a.chain_size(), oracles)?
        }
    };
    memo.insert(t.id(), value);
    Ok(value)
}

fn apply_symbol(
    symbol: &Symbol,
    values: &[ChainValue],
    chain_size: u8,
    oracles: &OracleBindings,
) -> Result<ChainValue> {
    match symbol {
        Symbol::OrderStatistic { rank, .. } => {
            let t = ChainTuple::new(chain_size, values.to_vec())?;
            order_statistic(&t, *rank)
        }
        Symbol::Median { arity } => {
            let t = ChainTuple::new(chain_size, values.to_vec())?;
            order_statistic(&t, arity.div_ceil(2))
        }
        Symbol::Oracle { name, arity } => {
            let table = oracles
                .get(name)
                .ok_or_else(|| Error::UnboundOracle(name.clone()))?;
            if table.arity() != *arity {
                return Err(Error::OracleArityMismatch {
                    name: name.clone(),
                    table_arity: table.arity(),
                    symbol_arity: *arity,
                });
            }
            if table.chain_size() != chain_size {
                return Err(Error::DomainMismatch {
                    value: table.chain_size(),
                    chain_size,
                });
            }
            table.apply(&ChainTuple::new(chain_size, values.to_vec())?)
        }
    }
}

/// All oracle symbols occurring in a term, deduplicated.
pub fn oracle_symbols(t: &Term) -> Vec<Symbol> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut visited = HashSet::new();
    let mut stack = vec![t.clone()];
    while let Some(t) = stack.pop() {
        if !visited.insert(t.id()) {
            continue;
        }
        if let Node::Application(s, children) = t.node() {
            if matches!(s, Symbol::Oracle { .. }) && seen.insert(s.clone()) {
                out.push(s.clone());
            }
            stack.extend(children.iter().cloned());
        }
    }
    out
}


#[cfg(test)]
mod tests {
    use super::tests_support::arb_small_term;
    use super::*;
    use crate::chain::order_statistic;
    use proptest::prelude::*;

    fn med(n: usize) -> Symbol {
        Symbol::median(n).unwrap()
    }

    fn v(i: usize) -> Term {
        make_variable(i)
    }

    fn app(s: Symbol, children: Vec<Term>) -> Term {
        make_application(s, children).unwrap()
    }

    // reference evaluator: recursive, no memoization, independent sorting
    fn eval_naive(t: &Term, a: &Assignment, oracles: &OracleBindings) -> ChainValue {
        match t.node() {
            Node::Variable(i) => a.value(*i).unwrap(),
            Node::Application(symbol, children) => {
                let vals: Vec<ChainValue> =
                    children.iter().map(|c| eval_naive(c, a, oracles)).collect();
                match symbol {
                    Symbol::OrderStatistic { rank, .. } => {
                        let mut sorted = vals;
                        sorted.sort();
                        sorted[rank - 1]
                    }
                    Symbol::Median { arity } => {
                        let mut sorted = vals;
                        sorted.sort();
                        sorted[arity.div_ceil(2) - 1]
                    }
                    Symbol::Oracle { name, .. } => {
                        let table = oracles.get(name).unwrap();
                        table
                            .apply(&ChainTuple::new(a.chain_size(), vals).unwrap())
                            .unwrap()
                    }
                }
            }
        }
    }

    fn assignment(d: u8, vals: &[u8]) -> Assignment {
        Assignment::new(d, vals.iter().map(|&x| ChainValue(x)).collect()).unwrap()
    }

    #[test]
    fn variable_stats() {
        let t = v(0);
        assert_eq!(t.arity(), 1);
        assert_eq!(t.depth(), 0);
        assert_eq!(t.node_count(), 1);
    }

    #[test]
    fn application_stats() {
        let t = app(med(3), vec![v(0), v(1), v(2)]);
        assert_eq!(t.arity(), 3);
        assert_eq!(t.depth(), 1);
        assert_eq!(t.node_count(), 4);
    }

    #[test]
    fn hash_consing_returns_identical_nodes() {
        let a = app(med(3), vec![v(0), v(0), v(1)]);
        let b = app(med(3), vec![v(0), v(0), v(1)]);
        assert_eq!(a.id(), b.id());
        assert_eq!(a, b);
    }

    #[test]
    fn arity_mismatch_rejected() {
        let r = make_application(med(3), vec![v(0), v(1)]);
        assert!(matches!(r, Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn substitute_identity_frame() {
        let body = app(med(3), vec![v(0), v(1), v(2)]);
        let map: HashMap<usize, Term> = [(0, body.clone())].into();
        assert_eq!(v(0).substitute(&map).unwrap(), body);
    }

    #[test]
    fn substitute_identifies_variables() {
        let t = app(med(3), vec![v(0), v(1), v(2)]);
        let map: HashMap<usize, Term> = [(0, v(0)), (1, v(0)), (2, v(1))].into();
        let s = t.substitute(&map).unwrap();
        assert_eq!(s, app(med(3), vec![v(0), v(0), v(1)]));
        assert_eq!(s.arity(), 2);
    }

    #[test]
    fn substitute_missing_replacement() {
        let t = app(med(3), vec![v(0), v(1), v(2)]);
        let map: HashMap<usize, Term> = [(0, v(0))].into();
        assert!(matches!(
            t.substitute(&map),
            Err(Error::MissingReplacement(_))
        ));
    }

    #[test]
    fn evaluate_basics() {
        let no = OracleBindings::new();
        let m3 = app(med(3), vec![v(0), v(1), v(2)]);
        assert_eq!(
            evaluate(&m3, &assignment(4, &[1, 2, 3]), &no).unwrap(),
            ChainValue(2)
        );
        assert_eq!(
            evaluate(&v(1), &assignment(8, &[5, 7]), &no).unwrap(),
            ChainValue(7)
        );
        let folded = app(med(5), vec![v(0), v(1), v(1), v(2), v(2)]);
        assert_eq!(
            evaluate(&folded, &assignment(3, &[0, 2, 1]), &no).unwrap(),
            ChainValue(1)
        );
    }

    #[test]
    fn evaluate_unbound_oracle() {
        let t = app(Symbol::oracle("f", 2).unwrap(), vec![v(0), v(1)]);
        let r = evaluate(&t, &assignment(2, &[0, 1]), &OracleBindings::new());
        assert!(matches!(r, Err(Error::UnboundOracle(_))));
    }

    #[test]
    fn evaluate_bound_oracle() {
        let t = app(Symbol::oracle("max2", 2).unwrap(), vec![v(0), v(1)]);
        let table = FunctionTable::order_statistic(2, 2, 3).unwrap();
        let oracles = OracleBindings::new().bind("max2", table);
        assert_eq!(
            evaluate(&t, &assignment(3, &[1, 2]), &oracles).unwrap(),
            ChainValue(2)
        );
    }

    #[test]
    fn boolean_median_is_majority() {
        let no = OracleBindings::new();
        let m3 = app(med(3), vec![v(0), v(1), v(2)]);
        let table = evaluate_all_boolean(&m3, &no).unwrap();
        for a in 0..8u64 {
            let bits = [(a & 1) as u8, ((a >> 1) & 1) as u8, ((a >> 2) & 1) as u8];
            let ones = bits.iter().filter(|&&b| b == 1).count();
            assert_eq!(table.bit(a), if ones >= 2 { 1 } else { 0 });
        }
        let proj = evaluate_all_boolean(&v(0), &no).unwrap();
        for a in 0..2u64 {
            assert_eq!(proj.bit(a), a as u8);
        }
    }

    #[test]
    fn boolean_folded_median_equals_ternary() {
        let no = OracleBindings::new();
        let m3 = app(med(3), vec![v(0), v(1), v(2)]);
        let folded = app(med(5), vec![v(0), v(1), v(1), v(2), v(2)]);
        assert_eq!(
            evaluate_all_boolean(&m3, &no).unwrap(),
            evaluate_all_boolean(&folded, &no).unwrap()
        );
        // cross-check against the generic evaluator on all 8 assignments
        for a in 0..8u64 {
            let vals = [(a & 1) as u8, ((a >> 1) & 1) as u8, ((a >> 2) & 1) as u8];
            let direct = evaluate(&folded, &assignment(2, &vals), &no).unwrap();
            assert_eq!(direct.0, evaluate_all_boolean(&folded, &no).unwrap().bit(a));
        }
    }

    #[test]
    fn boolean_arity_limit() {
        let r = evaluate_all_boolean_with_limit(&v(25), &OracleBindings::new(), 20);
        assert!(matches!(r, Err(Error::BooleanArityLimit { .. })));
    }

    #[test]
    fn boolean_wide_terms_use_multiple_words() {
        // arity 8 forces 4 words; compare word-packed vs generic
        let no = OracleBindings::new();
        let t = app(
            Symbol::order_statistic(8, 4).unwrap(),
            (0..8).map(v).collect(),
        );
        let table = evaluate_all_boolean(&t, &no).unwrap();
        for a in 0..256u64 {
            let vals: Vec<u8> = (0..8).map(|i| ((a >> i) & 1) as u8).collect();
            let direct = evaluate(&t, &assignment(2, &vals), &no).unwrap();
            assert_eq!(direct.0, table.bit(a), "assignment {a}");
        }
    }

    #[test]
    fn oracle_symbols_are_collected() {
        let f = Symbol::oracle("f", 2).unwrap();
        let t = app(f.clone(), vec![app(f.clone(), vec![v(0), v(1)]), v(2)]);
        assert_eq!(oracle_symbols(&t), vec![f]);
    }

    proptest! {
        #[test]
        fn memoized_matches_naive(t in arb_small_term(), vals in proptest::collection::vec(0u8..3, 4)) {
            let no = OracleBindings::new();
            let a = assignment(3, &vals);
            prop_assert_eq!(evaluate(&t, &a, &no).unwrap(), eval_naive(&t, &a, &no));
        }

        #[test]
        fn substitution_is_associative(
            t in arb_small_term(),
            inner in proptest::collection::vec(arb_small_term(), 4),
            outer_vals in proptest::collection::vec(0usize..4, 4),
        ) {
            let m1: HashMap<usize, Term> = inner.iter().cloned().enumerate().collect();
            let m2: HashMap<usize, Term> =
                outer_vals.iter().map(|&x| make_variable(x)).enumerate().collect();
            let two_steps = t.substitute(&m1).unwrap().substitute(&m2).unwrap();
            let composed: HashMap<usize, Term> = m1
                .iter()
                .map(|(&i, s)| (i, s.substitute(&m2).unwrap()))
                .collect();
            prop_assert_eq!(two_steps, t.substitute(&composed).unwrap());
        }

        #[test]
        fn boolean_agrees_with_generic(t in arb_small_term()) {
            let no = OracleBindings::new();
            let table = evaluate_all_boolean(&t, &no).unwrap();
            for a in 0..(1u64 << t.arity()) {
                let vals: Vec<u8> = (0..t.arity()).map(|i| ((a >> i) & 1) as u8).collect();
                let direct = evaluate(&t, &assignment(2, &vals), &no).unwrap();
                prop_assert_eq!(direct.0, table.bit(a));
            }
        }

        #[test]
        fn sharing_bounds_node_count(t in arb_small_term()) {
            // substituting the same subterm everywhere must not inflate the DAG
            let heavy = app(med(3), vec![v(0), v(1), v(2)]);
            let map: HashMap<usize, Term> = (0..4).map(|i| (i, heavy.clone())).collect();
            let s = t.substitute(&map).unwrap();
            prop_assert!(s.node_count() <= t.node_count() + heavy.node_count());
        }

        #[test]
        fn order_statistic_symbols_match_chain(vals in proptest::collection::vec(0u8..4, 4), k in 1usize..=4) {
            let t = app(Symbol::order_statistic(4, k).unwrap(), (0..4).map(v).collect());
            let a = assignment(4, &vals);
            let tuple = ChainTuple::from_indices(4, &vals).unwrap();
            prop_assert_eq!(
                evaluate(&t, &a, &OracleBindings::new()).unwrap(),
                order_statistic(&tuple, k).unwrap()
            );
        }
    }
}
