//! Term constructions over median, order-statistic and majority functions on
//! finite chains, together with brute-force verification of every identity
//! they are supposed to satisfy.
//!
//! The crate has four layers:
//!
//! * [`chain`] — finite chains, order statistics, majority predicates: the
//!   semantic ground truth.
//! * [`term`] — hash-consed term DAGs with a generic chain evaluator and a
//!   bit-parallel Boolean fast path.
//! * [`constructions`] — one executable builder per identification or
//!   boosting construction, the exact-rational frequency sequences, and the
//!   planner that strings them together.
//! * [`verify`] — exhaustive and randomized checkers with deterministic
//!   counterexamples, adversarial majority oracles, and the cascade
//!   simulator.

pub mod chain;
pub mod constructions;
pub mod error;
pub mod term;
pub mod verify;

pub use error::{Error, Result};
