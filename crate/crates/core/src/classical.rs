//! Set-valued semantics: controllable predecessors and fixpoint evaluation.

use std::collections::BTreeMap;

use bitvec::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arena::Arena;
use crate::assertion::AtomScope;
use crate::error::{Error, Result};
use crate::formula::{FixKind, Formula};
use crate::game::VariableSet;

/// A set of states, one bit per state index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "StateList", try_from = "StateList")]
pub struct StateSet {
    bits: BitVec<u64, Lsb0>,
}

impl StateSet {
    pub fn empty(n: usize) -> Self {
        StateSet {
            bits: bitvec![u64, Lsb0; 0; n],
        }
    }

    pub fn full(n: usize) -> Self {
        StateSet {
            bits: bitvec![u64, Lsb0; 1; n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize) -> bool) -> Self {
        StateSet {
            bits: (0..n).map(&mut f).collect(),
        }
    }

    /// Width: the size of the state space, not the cardinality.
    pub fn universe(&self) -> usize {
        self.bits.len()
    }

    pub fn contains(&self, s: usize) -> bool {
        self.bits[s]
    }

    pub fn insert(&mut self, s: usize) {
        self.bits.set(s, true);
    }

    pub fn remove(&mut self, s: usize) {
        self.bits.set(s, false);
    }

    pub fn count(&self) -> usize {
        self.bits.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.not_any()
    }

    pub fn is_full(&self) -> bool {
        self.bits.all()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter_ones()
    }

    pub fn union(&self, other: &StateSet) -> StateSet {
        StateSet {
            bits: self.bits.clone() | &other.bits,
        }
    }

    pub fn intersection(&self, other: &StateSet) -> StateSet {
        StateSet {
            bits: self.bits.clone() & &other.bits,
        }
    }

    pub fn complement(&self) -> StateSet {
        StateSet {
            bits: !self.bits.clone(),
        }
    }

    pub fn is_subset(&self, other: &StateSet) -> bool {
        self.bits.iter_ones().all(|i| other.bits[i])
    }

    pub fn is_disjoint(&self, other: &StateSet) -> bool {
        self.bits.iter_ones().all(|i| !other.bits[i])
    }
}

/// Serialized form of a [`StateSet`]: the universe size and the members.
#[derive(Serialize, Deserialize)]
struct StateList {
    universe: usize,
    members: Vec<usize>,
}

impl From<StateSet> for StateList {
    fn from(s: StateSet) -> Self {
        StateList {
            universe: s.universe(),
            members: s.iter().collect(),
        }
    }
}

impl TryFrom<StateList> for StateSet {
    type Error = String;
    fn try_from(l: StateList) -> Result<Self, String> {
        let mut s = StateSet::empty(l.universe);
        for m in l.members {
            if m >= l.universe {
                return Err(format!("state {m} outside a universe of {}", l.universe));
            }
            s.insert(m);
        }
        Ok(s)
    }
}

/// Relational-variable assignment for classical evaluation.
pub type SetValuation = BTreeMap<String, StateSet>;

/// Per-fixpoint iteration counts observed during an evaluation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EvalStats {
    /// Largest number of value-changing iterations of any single fixpoint
    /// computation, keyed by bound variable.
    pub max_changes: BTreeMap<String, u64>,
    /// Total number of body evaluations across all fixpoints.
    pub body_evaluations: u64,
}

impl EvalStats {
    pub fn record(&mut self, var: &str, changes: u64) {
        let e = self.max_changes.entry(var.to_string()).or_insert(0);
        *e = (*e).max(changes);
    }

    /// Largest change count over all fixpoints.
    pub fn peak(&self) -> u64 {
        self.max_changes.values().copied().max().unwrap_or(0)
    }
}

/// `{ s | every valid input has a valid output landing in S }`.
pub fn cpre_sys(arena: &Arena, set: &StateSet) -> StateSet {
    StateSet::from_fn(arena.num_states(), |s| {
        arena
            .moves(s)
            .all(|m| m.succs.iter().any(|&t| set.contains(t as usize)))
    })
}

/// `{ s | some valid input forces every valid output into S }`.
pub fn cpre_env(arena: &Arena, set: &StateSet) -> StateSet {
    StateSet::from_fn(arena.num_states(), |s| {
        arena
            .moves(s)
            .any(|m| m.succs.iter().all(|&t| set.contains(t as usize)))
    })
}

/// Truth table of a state predicate (`Atom`, `NegAtom` or `Prop`).
pub(crate) fn literal_table(vars: &VariableSet, f: &Formula) -> Result<Option<Vec<bool>>> {
    let lookup = |v: &str| {
        vars.index_of(v)
            .ok_or_else(|| Error::MalformedAssertion(format!("unknown variable `{v}` in formula")))
    };
    let n = vars.num_states();
    Ok(Some(match f {
        Formula::Atom(v) => {
            let i = lookup(v)?;
            (0..n).map(|s| s >> i & 1 == 1).collect()
        }
        Formula::NegAtom(v) => {
            let i = lookup(v)?;
            (0..n).map(|s| s >> i & 1 == 0).collect()
        }
        Formula::Prop(a) => {
            let b = a.bind(vars, AtomScope::State)?;
            (0..n).map(|s| b.holds(s as u32, 0)).collect()
        }
        _ => return Ok(None),
    }))
}

/// Evaluates `f` over the explicit arena. Negation is complement, `mu`
/// iterates from the empty set and `nu` from the full set.
pub fn eval_classical(arena: &Arena, f: &Formula, valuation: &SetValuation) -> Result<StateSet> {
    eval_classical_with_stats(arena, f, valuation).map(|(s, _)| s)
}

pub fn eval_classical_with_stats(
    arena: &Arena,
    f: &Formula,
    valuation: &SetValuation,
) -> Result<(StateSet, EvalStats)> {
    f.check_monotone()?;
    let mut ev = Classical {
        arena,
        env: valuation.clone(),
        stats: EvalStats::default(),
    };
    let out = ev.eval(f)?;
    Ok((out, ev.stats))
}

struct Classical<'a> {
    arena: &'a Arena,
    env: SetValuation,
    stats: EvalStats,
}

impl Classical<'_> {
    fn eval(&mut self, f: &Formula) -> Result<StateSet> {
        let n = self.arena.num_states();
        if let Some(t) = literal_table(self.arena.vars(), f)? {
            return Ok(StateSet::from_fn(n, |s| t[s]));
        }
        Ok(match f {
            Formula::Var(x) => self
                .env
                .get(x)
                .cloned()
                .ok_or_else(|| Error::UnboundVariable(x.clone()))?,
            Formula::And(a, b) => self.eval(a)?.intersection(&self.eval(b)?),
            Formula::Or(a, b) => self.eval(a)?.union(&self.eval(b)?),
            Formula::Not(a) => self.eval(a)?.complement(),
            Formula::Diamond(a) => cpre_sys(self.arena, &self.eval(a)?),
            Formula::Square(a) => cpre_env(self.arena, &self.eval(a)?),
            Formula::Fix(kind, x, body) => {
                let mut cur = match kind {
                    FixKind::Mu => StateSet::empty(n),
                    FixKind::Nu => StateSet::full(n),
                };
                let saved = self.env.remove(x);
                let cap = n as u64;
                let mut changes = 0u64;
                let result = loop {
                    self.env.insert(x.clone(), cur.clone());
                    self.stats.body_evaluations += 1;
                    let next = self.eval(body)?;
                    if next == cur {
                        break cur;
                    }
                    let chain_ok = match kind {
                        FixKind::Mu => cur.is_subset(&next),
                        FixKind::Nu => next.is_subset(&cur),
                    };
                    if !chain_ok {
                        return Err(Error::ChainViolation { var: x.clone() });
                    }
                    changes += 1;
                    if changes > cap {
                        return Err(Error::IterationCap { var: x.clone(), cap });
                    }
                    cur = next;
                };
                self.stats.record(x, changes);
                match saved {
                    Some(v) => self.env.insert(x.clone(), v),
                    None => self.env.remove(x),
                };
                result
            }
            Formula::Atom(_) | Formula::NegAtom(_) | Formula::Prop(_) => unreachable!("literal"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::g1;
    use crate::formula;

    fn y_states(arena: &Arena) -> StateSet {
        StateSet::from_fn(arena.num_states(), |s| s & 0b10 != 0)
    }

    #[test]
    fn cpre_on_g1() {
        let a = g1().arena().unwrap();
        let n = a.num_states();
        assert!(cpre_sys(&a, &StateSet::full(n)).is_full());
        assert!(cpre_sys(&a, &StateSet::empty(n)).is_empty());
        assert!(cpre_sys(&a, &y_states(&a)).is_full());
        assert!(cpre_env(&a, &StateSet::full(n)).is_full());
        assert!(cpre_env(&a, &y_states(&a)).is_empty());
    }

    #[test]
    fn g1_formulas() {
        let a = g1().arena().unwrap();
        let v = SetValuation::new();
        assert!(eval_classical(&a, &formula::safety(), &v).unwrap().is_full());
        let unreachable = formula::reachability(Formula::parse("false").unwrap());
        assert!(eval_classical(&a, &unreachable, &v).unwrap().is_empty());
        let b = formula::buchi(Formula::atom("y"));
        assert!(eval_classical(&a, &b, &v).unwrap().is_full());
    }

    #[test]
    fn free_variables_need_a_valuation() {
        let a = g1().arena().unwrap();
        let f = Formula::parse("<>Q").unwrap();
        assert!(matches!(
            eval_classical(&a, &f, &SetValuation::new()),
            Err(Error::UnboundVariable(_))
        ));
        let mut v = SetValuation::new();
        v.insert("Q".into(), y_states(&a));
        assert!(eval_classical(&a, &f, &v).unwrap().is_full());
    }

    #[test]
    fn unmonotone_formulas_are_rejected() {
        let a = g1().arena().unwrap();
        let f = Formula::parse("mu X . !X").unwrap();
        assert!(matches!(
            eval_classical(&a, &f, &SetValuation::new()),
            Err(Error::NotMonotone { .. })
        ));
    }

    #[test]
    fn unknown_atoms_are_reported() {
        let a = g1().arena().unwrap();
        let f = Formula::parse("z").unwrap();
        assert!(matches!(
            eval_classical(&a, &f, &SetValuation::new()),
            Err(Error::MalformedAssertion(_))
        ));
    }
}
