//! Energy μ-calculus over symbolic weighted game structures.
//!
//! The crate evaluates μ-calculus formulas both classically (sets of states)
//! and over energy functions (per-state minimum initial credits), computes
//! sufficient bounds for unbounded energy accumulation, and ships two
//! independent brute-force oracles used for differential testing: a
//! reduction to a classical game with the credit encoded in extra variables,
//! and an explicit energy parity game solved by unfolding and Zielonka's
//! algorithm.

pub mod arena;
pub mod assertion;
pub mod check;
pub mod classical;
pub mod energy;
pub mod error;
pub mod fixtures;
pub mod formula;
pub mod game;
pub mod gamefile;
mod lexer;
pub mod parity;
pub mod random;
pub mod reduction;
pub mod solver;

pub use arena::Arena;
pub use assertion::Assertion;
pub use classical::{SetValuation, StateSet};
pub use energy::{EnergyFunction, EnergyValuation, EnergyValue};
pub use error::{Error, ParseError, Result};
pub use formula::{FixKind, Formula, FormulaMetrics, Fragment};
pub use game::{Bound, PlayPrefix, PriorityRule, State, VariableSet, WeightRule, WeightedGameStructure, MAX_VARS};
