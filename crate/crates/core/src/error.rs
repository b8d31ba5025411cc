use thiserror::Error;

/// Syntax error with a byte offset into the parsed text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at {pos}: {message}")]
pub struct ParseError {
    pub pos: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(pos: usize, message: impl Into<String>) -> Self {
        ParseError {
            pos,
            message: message.into(),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("malformed assertion: {0}")]
    MalformedAssertion(String),

    #[error("primed atom `{0}'` evaluated without a next state")]
    Arity(String),

    #[error("invalid variable set: {0}")]
    InvalidVariables(String),

    #[error("{count} variables exceed the explicit state-space cap of {cap}")]
    StateCap { count: usize, cap: usize },

    #[error("no weight rule covers the transition {from} -> {to}")]
    IncompleteWeightCover { from: String, to: String },

    #[error("weight queried on a pair that is not a system transition: {from} -> {to}")]
    NotATransition { from: String, to: String },

    #[error("invalid initial credit: {0}")]
    InvalidCredit(String),

    #[error("arithmetic overflow while accumulating energy")]
    Overflow,

    #[error("energy functions with different bounds ({0} vs {1})")]
    BoundMismatch(u64, u64),

    #[error("relational variable `{0}` is not bound by the valuation")]
    UnboundVariable(String),

    #[error("formula is not monotone: `{var}` occurs under an odd number of negations at {path}")]
    NotMonotone { var: String, path: String },

    #[error("formula fragment `{found}` not allowed here (expected {expected})")]
    WrongFragment { found: String, expected: String },

    #[error("formula is not closed: free relational variable `{0}`")]
    NotClosed(String),

    #[error("fixpoint of `{var}` did not stabilize within {cap} iterations")]
    IterationCap { var: String, cap: u64 },

    #[error("fixpoint iterates of `{var}` are not a monotone chain")]
    ChainViolation { var: String },

    #[error("priority guards do not partition the state space: {0}")]
    PriorityPartition(String),

    #[error("game carries no priority annotation")]
    NoPriorities,

    #[error("unknown builtin formula `{0}`")]
    UnknownBuiltin(String),

    #[error("builtin parameter error: {0}")]
    BuiltinParam(String),

    #[error("game file error: {0}")]
    GameFile(String),

    #[error("explicit game format error on line {line}: {message}")]
    ExplicitFormat { line: usize, message: String },

    /// An invariant that the theory guarantees was observed to fail.
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
