//! Small hand-written games shared by tests, benches and documentation.

use crate::assertion::Assertion;
use crate::game::{PriorityRule, VariableSet, WeightRule, WeightedGameStructure};

fn a(text: &str) -> Assertion {
    Assertion::parse(text).expect("fixture assertion")
}

/// Two variables, `x` an input and `y` an output; every move is allowed.
/// Moving to a `y` state costs one unit, any other move earns one.
pub fn g1() -> WeightedGameStructure {
    let vars = VariableSet::new(vec!["x".into(), "y".into()], &["x".into()]).expect("fixture vars");
    WeightedGameStructure::new(
        vars,
        a("true"),
        a("true"),
        vec![
            WeightRule {
                guard: a("y'"),
                weight: -1,
            },
            WeightRule {
                guard: a("true"),
                weight: 1,
            },
        ],
    )
    .expect("fixture game")
}

/// `g1` with Büchi priorities: `y` states have priority 0, the rest 1.
pub fn g1_buchi_priorities() -> WeightedGameStructure {
    g1().with_priorities(vec![
        PriorityRule {
            guard: a("y"),
            priority: 0,
        },
        PriorityRule {
            guard: a("!y"),
            priority: 1,
        },
    ])
    .expect("fixture priorities")
}
