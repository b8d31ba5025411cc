//! Symbolic weighted game structures over Boolean variables.
//!
//! States are explicit bit vectors: bit `i` holds the value of the `i`-th
//! declared variable. Inputs (environment variables) and outputs (system
//! variables) are distinguished by a mask over the same bit positions.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arena::Arena;
use crate::assertion::{Assertion, AtomScope, BoundAssertion};
use crate::error::{Error, Result};
use crate::formula::Formula;

/// Hard cap on the number of Boolean variables of an explicitly enumerated game.
pub const MAX_VARS: usize = 24;

/// A truth assignment to the declared variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub u32);

impl State {
    #[inline]
    pub fn bit(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Ordered variable names with an environment/system partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableSet {
    names: Vec<String>,
    lookup: HashMap<String, usize>,
    input_mask: u32,
}

impl VariableSet {
    pub fn new(names: Vec<String>, inputs: &[String]) -> Result<Self> {
        if names.len() > MAX_VARS {
            return Err(Error::StateCap {
                count: names.len(),
                cap: MAX_VARS,
            });
        }
        let mut lookup = HashMap::new();
        for (i, n) in names.iter().enumerate() {
            if !is_identifier(n) || n == "true" || n == "false" {
                return Err(Error::InvalidVariables(format!("`{n}` is not a valid variable name")));
            }
            if lookup.insert(n.clone(), i).is_some() {
                return Err(Error::InvalidVariables(format!("duplicate variable `{n}`")));
            }
        }
        let mut input_mask = 0u32;
        for x in inputs {
            let i = *lookup
                .get(x)
                .ok_or_else(|| Error::InvalidVariables(format!("input `{x}` is not declared")))?;
            input_mask |= 1 << i;
        }
        Ok(VariableSet {
            names,
            lookup,
            input_mask,
        })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn inputs(&self) -> Vec<String> {
        self.names
            .iter()
            .enumerate()
            .filter(|(i, _)| self.is_input(*i))
            .map(|(_, n)| n.clone())
            .collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.lookup.get(name).copied()
    }

    pub fn is_input(&self, i: usize) -> bool {
        self.input_mask >> i & 1 == 1
    }

    pub fn input_mask(&self) -> u32 {
        self.input_mask
    }

    pub fn output_mask(&self) -> u32 {
        self.full_mask() & !self.input_mask
    }

    pub fn full_mask(&self) -> u32 {
        if self.names.len() == 32 {
            u32::MAX
        } else {
            (1u32 << self.names.len()) - 1
        }
    }

    /// `N = 2^|V|`.
    pub fn num_states(&self) -> usize {
        1usize << self.names.len()
    }

    pub fn states(&self) -> impl Iterator<Item = State> {
        (0..self.num_states() as u32).map(State)
    }

    /// Renders a state as a conjunction of literals, e.g. `x & !y`.
    pub fn describe(&self, s: State) -> String {
        if self.names.is_empty() {
            return "true".to_string();
        }
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| if s.bit(i) { n.clone() } else { format!("!{n}") })
            .collect::<Vec<_>>()
            .join(" & ")
    }

    /// All states satisfying a pure-state assertion.
    pub fn states_satisfying(&self, a: &Assertion) -> Result<Vec<State>> {
        let b = a.bind(self, AtomScope::State)?;
        Ok(self.states().filter(|s| b.holds(s.0, 0)).collect())
    }

    /// The unique state satisfying `text`; errors when zero or several match.
    pub fn state_from_literals(&self, text: &str) -> Result<State> {
        let a = Assertion::parse(text)?;
        let hits = self.states_satisfying(&a)?;
        match hits.as_slice() {
            [s] => Ok(*s),
            _ => Err(Error::MalformedAssertion(format!(
                "`{text}` matches {} states, expected exactly one",
                hits.len()
            ))),
        }
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Iterates the submasks of `mask` in increasing numeric order.
pub(crate) fn submasks(mask: u32) -> impl Iterator<Item = u32> {
    let mut next = Some(0u32);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == mask {
            None
        } else {
            Some(cur.wrapping_sub(mask) & mask)
        };
        Some(cur)
    })
}

/// An upper bound on energy accumulation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Bound {
    Finite(u64),
    Infinite,
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(c) => write!(f, "{c}"),
            Bound::Infinite => write!(f, "inf"),
        }
    }
}

impl From<Bound> for String {
    fn from(b: Bound) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for Bound {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl std::str::FromStr for Bound {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "inf" | "infinite" | "+inf" => Ok(Bound::Infinite),
            _ => s
                .parse::<u64>()
                .map(Bound::Finite)
                .map_err(|_| format!("bound must be a natural number or `inf`, got `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightRule {
    pub guard: Assertion,
    pub weight: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorityRule {
    pub guard: Assertion,
    pub priority: u32,
}

/// A game structure extended with a weight function on system transitions.
#[derive(Debug, Clone)]
pub struct WeightedGameStructure {
    vars: VariableSet,
    rho_e: Assertion,
    rho_s: Assertion,
    weight_rules: Vec<WeightRule>,
    priorities: Option<Vec<PriorityRule>>,
    formula: Option<Formula>,
    bound_rho_e: BoundAssertion,
    bound_rho_s: BoundAssertion,
    bound_weights: Vec<(BoundAssertion, i64)>,
}

impl WeightedGameStructure {
    pub fn new(vars: VariableSet, rho_e: Assertion, rho_s: Assertion, weight_rules: Vec<WeightRule>) -> Result<Self> {
        let bound_rho_e = rho_e.bind(&vars, AtomScope::InputTransition)?;
        let bound_rho_s = rho_s.bind(&vars, AtomScope::Transition)?;
        let bound_weights = weight_rules
            .iter()
            .map(|r| Ok((r.guard.bind(&vars, AtomScope::Transition)?, r.weight)))
            .collect::<Result<Vec<_>>>()?;
        Ok(WeightedGameStructure {
            vars,
            rho_e,
            rho_s,
            weight_rules,
            priorities: None,
            formula: None,
            bound_rho_e,
            bound_rho_s,
            bound_weights,
        })
    }

    pub fn with_priorities(mut self, rules: Vec<PriorityRule>) -> Result<Self> {
        for r in &rules {
            r.guard.bind(&self.vars, AtomScope::State)?;
        }
        self.priorities = Some(rules);
        Ok(self)
    }

    pub fn with_formula(mut self, formula: Formula) -> Self {
        self.formula = Some(formula);
        self
    }

    pub fn vars(&self) -> &VariableSet {
        &self.vars
    }

    pub fn rho_e(&self) -> &Assertion {
        &self.rho_e
    }

    pub fn rho_s(&self) -> &Assertion {
        &self.rho_s
    }

    pub fn weight_rules(&self) -> &[WeightRule] {
        &self.weight_rules
    }

    pub fn priorities(&self) -> Option<&[PriorityRule]> {
        self.priorities.as_deref()
    }

    pub fn formula(&self) -> Option<&Formula> {
        self.formula.as_ref()
    }

    pub fn num_states(&self) -> usize {
        self.vars.num_states()
    }

    /// `K`: the largest absolute weight over all rules.
    pub fn max_abs_weight(&self) -> u64 {
        self.weight_rules
            .iter()
            .map(|r| r.weight.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    #[inline]
    pub(crate) fn env_allows(&self, s: State, sx: u32) -> bool {
        self.bound_rho_e.holds(s.0, sx)
    }

    #[inline]
    pub(crate) fn sys_allows(&self, s: State, t: State) -> bool {
        self.bound_rho_s.holds(s.0, t.0)
    }

    /// `{ t | (s, p(t)) |= rho_e & rho_s }`.
    pub fn successors(&self, s: State) -> Vec<State> {
        self.vars
            .states()
            .filter(|&t| self.env_allows(s, t.0 & self.vars.input_mask()) && self.sys_allows(s, t))
            .collect()
    }

    /// Valid inputs at `s`, as states carrying only input bits.
    pub fn env_choices(&self, s: State) -> Vec<State> {
        submasks(self.vars.input_mask())
            .filter(|&x| self.env_allows(s, x))
            .map(State)
            .collect()
    }

    /// Valid outputs at `s` after input `sx`, as states carrying only output bits.
    pub fn sys_choices(&self, s: State, sx: State) -> Vec<State> {
        let x = sx.0 & self.vars.input_mask();
        if !self.env_allows(s, x) {
            return Vec::new();
        }
        submasks(self.vars.output_mask())
            .filter(|&y| self.sys_allows(s, State(x | y)))
            .map(State)
            .collect()
    }

    pub fn is_env_deadlock(&self, s: State) -> bool {
        self.env_choices(s).is_empty()
    }

    pub fn is_sys_deadlock(&self, s: State, sx: State) -> bool {
        self.sys_choices(s, sx).is_empty()
    }

    /// `w^s(s, p(t))` under first-match rule ordering.
    pub fn weight(&self, s: State, t: State) -> Result<i64> {
        if !self.sys_allows(s, t) {
            return Err(Error::NotATransition {
                from: self.vars.describe(s),
                to: self.vars.describe(t),
            });
        }
        self.rule_weight(s, t)
    }

    pub(crate) fn rule_weight(&self, s: State, t: State) -> Result<i64> {
        self.bound_weights
            .iter()
            .find(|(g, _)| g.holds(s.0, t.0))
            .map(|(_, w)| *w)
            .ok_or_else(|| Error::IncompleteWeightCover {
                from: self.vars.describe(s),
                to: self.vars.describe(t),
            })
    }

    /// Checks that every `rho_s` transition is covered by some weight rule.
    pub fn validate_weights(&self) -> Result<()> {
        for s in self.vars.states() {
            for t in self.vars.states() {
                if self.sys_allows(s, t) {
                    self.rule_weight(s, t)?;
                }
            }
        }
        Ok(())
    }

    /// Reports pairs of weight rules that both match some system transition
    /// with different weights (the earlier rule wins).
    pub fn lint_weight_overlaps(&self) -> Vec<String> {
        let mut out = Vec::new();
        let n = self.bound_weights.len();
        for i in 0..n {
            for j in i + 1..n {
                if self.bound_weights[i].1 == self.bound_weights[j].1 {
                    continue;
                }
                let witness = self.vars.states().find_map(|s| {
                    self.vars
                        .states()
                        .find(|&t| {
                            self.sys_allows(s, t)
                                && self.bound_weights[i].0.holds(s.0, t.0)
                                && self.bound_weights[j].0.holds(s.0, t.0)
                        })
                        .map(|t| (s, t))
                });
                if let Some((s, t)) = witness {
                    out.push(format!(
                        "weight rules {i} (`{}`) and {j} (`{}`) overlap on {} -> {}; rule {i} applies",
                        self.weight_rules[i].guard,
                        self.weight_rules[j].guard,
                        self.vars.describe(s),
                        self.vars.describe(t)
                    ));
                }
            }
        }
        out
    }

    /// Priority of every state; each state must satisfy exactly one guard.
    pub fn priority_vector(&self) -> Result<Vec<u32>> {
        let rules = self.priorities.as_ref().ok_or(Error::NoPriorities)?;
        let bound = rules
            .iter()
            .map(|r| Ok((r.guard.bind(&self.vars, AtomScope::State)?, r.priority)))
            .collect::<Result<Vec<_>>>()?;
        self.vars
            .states()
            .map(|s| {
                let mut hits = bound.iter().filter(|(g, _)| g.holds(s.0, 0));
                match (hits.next(), hits.next()) {
                    (Some((_, p)), None) => Ok(*p),
                    (None, _) => Err(Error::PriorityPartition(format!(
                        "state {} has no priority",
                        self.vars.describe(s)
                    ))),
                    (Some(_), Some(_)) => Err(Error::PriorityPartition(format!(
                        "state {} matches several priority guards",
                        self.vars.describe(s)
                    ))),
                }
            })
            .collect()
    }

    /// Compiles the explicit transition table.
    pub fn arena(&self) -> Result<Arena> {
        Arena::from_game(self)
    }

    /// `EL_c(G, c0, prefix)`; with an infinite bound this is `c0` plus the weight sum.
    pub fn energy_level(&self, bound: Bound, c0: u64, prefix: &PlayPrefix) -> Result<i128> {
        Ok(*self.energy_levels(bound, c0, prefix)?.last().expect("nonempty prefix"))
    }

    /// Whether every prefix of `prefix` keeps a non-negative energy level.
    pub fn wins_energy_objective(&self, bound: Bound, c0: u64, prefix: &PlayPrefix) -> Result<bool> {
        Ok(self.energy_levels(bound, c0, prefix)?.iter().all(|&r| r >= 0))
    }

    fn energy_levels(&self, bound: Bound, c0: u64, prefix: &PlayPrefix) -> Result<Vec<i128>> {
        if let Bound::Finite(c) = bound {
            if c0 > c {
                return Err(Error::InvalidCredit(format!(
                    "initial credit {c0} exceeds the bound {c}"
                )));
            }
        }
        let mut levels = Vec::with_capacity(prefix.states.len());
        let mut r = c0 as i128;
        levels.push(r);
        for pair in prefix.states.windows(2) {
            let w = self.weight(pair[0], pair[1])? as i128;
            r = r.checked_add(w).ok_or(Error::Overflow)?;
            if let Bound::Finite(c) = bound {
                r = r.min(c as i128);
            }
            levels.push(r);
        }
        Ok(levels)
    }
}

/// A finite play prefix `s_0 ... s_k`, optionally followed by an input on
/// which the system is deadlocked.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayPrefix {
    states: Vec<State>,
    trailing_input: Option<State>,
}

impl PlayPrefix {
    pub fn new(game: &WeightedGameStructure, states: Vec<State>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidCredit("play prefix must be nonempty".into()));
        }
        for pair in states.windows(2) {
            let (s, t) = (pair[0], pair[1]);
            let x = t.0 & game.vars().input_mask();
            if !(game.env_allows(s, x) && game.sys_allows(s, t)) {
                return Err(Error::NotATransition {
                    from: game.vars().describe(s),
                    to: game.vars().describe(t),
                });
            }
        }
        Ok(PlayPrefix {
            states,
            trailing_input: None,
        })
    }

    pub fn with_trailing_input(mut self, input: State) -> Self {
        self.trailing_input = Some(input);
        self
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn trailing_input(&self) -> Option<State> {
        self.trailing_input
    }
}
