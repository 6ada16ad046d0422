use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rank {rank} out of range for arity {arity}")]
    InvalidRank { rank: usize, arity: usize },
    #[error("expected odd arity, got {0}")]
    EvenArity(usize),
    #[error("chain value {value} out of range for chain size {chain_size}")]
    DomainMismatch { value: u8, chain_size: u8 },
    #[error("arity mismatch: symbol {symbol} expects {expected} children, got {got}")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        got: usize,
    },
    #[error("no replacement for variable {0}")]
    MissingReplacement(usize),
    #[error("assignment covers {provided} variables but term has arity {required}")]
    AssignmentTooShort { required: usize, provided: usize },
    #[error("oracle symbol `{0}` is not bound to a function table")]
    UnboundOracle(String),
    #[error(
        "oracle `{name}` bound to a table of arity {table_arity}, symbol expects {symbol_arity}"
    )]
    OracleArityMismatch {
        name: String,
        table_arity: usize,
        symbol_arity: usize,
    },
    #[error("term arity {arity} exceeds the boolean evaluation limit {limit}")]
    BooleanArityLimit { arity: usize, limit: usize },
    #[error("node budget exceeded: {needed} nodes needed, budget is {budget}")]
    NodeBudget { needed: u64, budget: u64 },
    #[error("evaluation budget exceeded: {needed} evaluations needed, budget is {budget}")]
    EvalBudget { needed: u128, budget: u64 },
    #[error("width budget exceeded: next cascade width {width} over budget {budget}")]
    WidthBudget { width: String, budget: u64 },
    #[error("construction not applicable: {0}")]
    NotApplicable(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("bound sequence did not stop within {0} steps")]
    Divergence(usize),
    #[error("parse error at byte {offset}: {message}")]
    Parse { offset: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
