//! Energy-function semantics.
//!
//! An energy function maps every state to a credit in `[0, c] ∪ {+inf}`.
//! The lattice order is reversed integer order (`x ⪯ y` iff `x >= y`), so
//! the lattice join is integer `min`, the meet is integer `max`, `+inf` is
//! the bottom element and `0` the top.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::arena::Arena;
use crate::classical::{literal_table, EvalStats};
use crate::error::{Error, Result};
use crate::formula::{FixKind, Formula};
use crate::game::{State, WeightedGameStructure};

/// A credit in `[0, c] ∪ {+inf}`; `+inf` compares above every finite value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EnergyValue(u64);

impl EnergyValue {
    pub const ZERO: EnergyValue = EnergyValue(0);
    pub const INFINITY: EnergyValue = EnergyValue(u64::MAX);

    pub fn finite(x: u64) -> Self {
        assert!(x != u64::MAX, "finite credit out of range");
        EnergyValue(x)
    }

    pub fn is_infinite(self) -> bool {
        self.0 == u64::MAX
    }

    pub fn is_finite(self) -> bool {
        !self.is_infinite()
    }

    pub fn get(self) -> Option<u64> {
        self.is_finite().then_some(self.0)
    }

    /// `~x`: `0 <-> +inf`, otherwise `c + 1 - x`.
    pub fn neg(self, c: u64) -> Self {
        match self.get() {
            None => EnergyValue::ZERO,
            Some(0) => EnergyValue::INFINITY,
            Some(x) => EnergyValue(c + 1 - x),
        }
    }

    /// Lattice order: `self ⪯ other`.
    pub fn preceq(self, other: Self) -> bool {
        self >= other
    }
}

impl fmt::Display for EnergyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.get() {
            Some(x) => write!(f, "{x}"),
            None => f.write_str("inf"),
        }
    }
}

impl std::str::FromStr for EnergyValue {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "inf" | "+inf" => Ok(EnergyValue::INFINITY),
            _ => s
                .parse::<u64>()
                .ok()
                .filter(|&x| x != u64::MAX)
                .map(EnergyValue)
                .ok_or_else(|| format!("not a credit: `{s}`")),
        }
    }
}

impl Serialize for EnergyValue {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.get() {
            Some(x) => s.serialize_u64(x),
            None => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for EnergyValue {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(u64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) if x != u64::MAX => Ok(EnergyValue(x)),
            Repr::Num(x) => Err(serde::de::Error::custom(format!("credit {x} out of range"))),
            Repr::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A total map from states to credits at a fixed bound `c`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnergyFunction {
    bound: u64,
    values: Vec<EnergyValue>,
}

impl EnergyFunction {
    pub fn new(bound: u64, values: Vec<EnergyValue>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| v.get().is_some_and(|x| x > bound)) {
            return Err(Error::InvalidCredit(format!("{v} exceeds the bound {bound}")));
        }
        Ok(EnergyFunction { bound, values })
    }

    pub fn constant(bound: u64, n: usize, v: EnergyValue) -> Self {
        EnergyFunction::new(bound, vec![v; n]).expect("constant within bound")
    }

    /// `f_0`, the top element.
    pub fn zero(bound: u64, n: usize) -> Self {
        EnergyFunction::constant(bound, n, EnergyValue::ZERO)
    }

    /// `f_{+inf}`, the bottom element.
    pub fn infinity(bound: u64, n: usize) -> Self {
        EnergyFunction::constant(bound, n, EnergyValue::INFINITY)
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[EnergyValue] {
        &self.values
    }

    pub fn get(&self, s: usize) -> EnergyValue {
        self.values[s]
    }

    pub fn set(&mut self, s: usize, v: EnergyValue) {
        assert!(v.get().is_none_or(|x| x <= self.bound), "credit above bound");
        self.values[s] = v;
    }

    pub fn is_constant(&self, v: EnergyValue) -> bool {
        self.values.iter().all(|&x| x == v)
    }

    /// Pointwise `~`.
    pub fn neg(&self) -> Self {
        EnergyFunction {
            bound: self.bound,
            values: self.values.iter().map(|v| v.neg(self.bound)).collect(),
        }
    }

    fn zip(&self, other: &Self, op: impl Fn(EnergyValue, EnergyValue) -> EnergyValue) -> Result<Self> {
        if self.bound != other.bound {
            return Err(Error::BoundMismatch(self.bound, other.bound));
        }
        assert_eq!(self.values.len(), other.values.len(), "state spaces differ");
        Ok(EnergyFunction {
            bound: self.bound,
            values: self.values.iter().zip(&other.values).map(|(&a, &b)| op(a, b)).collect(),
        })
    }

    /// Lattice join: pointwise integer minimum.
    pub fn join(&self, other: &Self) -> Result<Self> {
        self.zip(other, EnergyValue::min)
    }

    /// Lattice meet: pointwise integer maximum.
    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.zip(other, EnergyValue::max)
    }

    /// `self ⪯ other` pointwise.
    pub fn leq(&self, other: &Self) -> Result<bool> {
        if self.bound != other.bound {
            return Err(Error::BoundMismatch(self.bound, other.bound));
        }
        Ok(self.values.iter().zip(&other.values).all(|(&a, &b)| a.preceq(b)))
    }
}

impl fmt::Display for EnergyFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, v) in self.values.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// Relational-variable assignment for energy evaluation.
pub type EnergyValuation = BTreeMap<String, EnergyFunction>;

/// Minimum credit to take a valid system transition of weight `w` and
/// continue with credit `e`.
#[inline]
pub fn ec_step(c: u64, w: i64, e: EnergyValue) -> EnergyValue {
    let Some(e) = e.get() else { return EnergyValue::INFINITY };
    let need = e as i128 - w as i128;
    if need > c as i128 {
        EnergyValue::INFINITY
    } else {
        EnergyValue(need.max(0) as u64)
    }
}

/// The environment's counterpart of [`ec_step`] on a valid transition.
#[inline]
pub fn ec_env_step(c: u64, w: i64, e: EnergyValue) -> EnergyValue {
    let (c, w) = (c as i128, w as i128);
    match e.get() {
        Some(0) => EnergyValue::ZERO,
        None if w + c < 0 => EnergyValue::ZERO,
        None if w >= 0 => EnergyValue::INFINITY,
        None => EnergyValue((c + 1 + w) as u64),
        Some(e) => {
            let sum = e as i128 + w;
            if sum <= 0 {
                EnergyValue::ZERO
            } else if sum > c {
                EnergyValue::INFINITY
            } else {
                EnergyValue(sum as u64)
            }
        }
    }
}

/// `EC_c((s, t), e)` on an arbitrary pair of states.
pub fn ec(game: &WeightedGameStructure, c: u64, s: State, t: State, e: EnergyValue) -> Result<EnergyValue> {
    if !game.env_allows(s, t.0 & game.vars().input_mask()) {
        return Ok(EnergyValue::ZERO);
    }
    if e.is_infinite() || !game.sys_allows(s, t) {
        return Ok(EnergyValue::INFINITY);
    }
    Ok(ec_step(c, game.rule_weight(s, t)?, e))
}

/// The dual `EC̄_c((s, t), e)` on an arbitrary pair of states.
pub fn ec_env(game: &WeightedGameStructure, c: u64, s: State, t: State, e: EnergyValue) -> Result<EnergyValue> {
    if !game.env_allows(s, t.0 & game.vars().input_mask()) {
        return Ok(EnergyValue::INFINITY);
    }
    if !game.sys_allows(s, t) {
        return Ok(EnergyValue::ZERO);
    }
    Ok(ec_env_step(c, game.rule_weight(s, t)?, e))
}

/// Energy controllable predecessor: for every state, the largest over valid
/// inputs of the smallest over valid outputs of the step credit. Invalid
/// outputs contribute `+inf` to the minimum and invalid inputs `0` to the
/// maximum, so only the arena's moves matter.
pub fn ecpre(arena: &Arena, f: &EnergyFunction) -> EnergyFunction {
    let c = f.bound;
    let values = (0..arena.num_states())
        .map(|s| {
            arena
                .moves(s)
                .map(|m| {
                    m.succs
                        .iter()
                        .zip(m.weights)
                        .map(|(&t, &w)| ec_step(c, w, f.values[t as usize]))
                        .min()
                        .unwrap_or(EnergyValue::INFINITY)
                })
                .max()
                .unwrap_or(EnergyValue::ZERO)
        })
        .collect();
    EnergyFunction { bound: c, values }
}

/// Dual energy controllable predecessor: smallest over valid inputs of the
/// largest over valid outputs of the dual step credit.
pub fn ecpre_env(arena: &Arena, f: &EnergyFunction) -> EnergyFunction {
    let c = f.bound;
    let values = (0..arena.num_states())
        .map(|s| {
            arena
                .moves(s)
                .map(|m| {
                    m.succs
                        .iter()
                        .zip(m.weights)
                        .map(|(&t, &w)| ec_env_step(c, w, f.values[t as usize]))
                        .max()
                        .unwrap_or(EnergyValue::ZERO)
                })
                .min()
                .unwrap_or(EnergyValue::INFINITY)
        })
        .collect();
    EnergyFunction { bound: c, values }
}

/// Evaluates `f` over energy functions at bound `c`.
pub fn eval_energy(arena: &Arena, c: u64, f: &Formula, valuation: &EnergyValuation) -> Result<EnergyFunction> {
    eval_energy_with_stats(arena, c, f, valuation).map(|(r, _)| r)
}

/// As [`eval_energy`], also reporting per-fixpoint iteration counts. Every
/// fixpoint is checked to stabilize within `N * (c + 1)` value-changing
/// iterations and to produce a monotone chain of iterates.
pub fn eval_energy_with_stats(
    arena: &Arena,
    c: u64,
    f: &Formula,
    valuation: &EnergyValuation,
) -> Result<(EnergyFunction, EvalStats)> {
    if c >= u64::MAX / 4 {
        return Err(Error::InvalidCredit(format!("bound {c} is too large to evaluate")));
    }
    f.check_monotone()?;
    if let Some(g) = valuation.values().find(|g| g.bound != c) {
        return Err(Error::BoundMismatch(g.bound, c));
    }
    let mut ev = Energy {
        arena,
        c,
        env: valuation.clone(),
        stats: EvalStats::default(),
    };
    let out = ev.eval(f)?;
    Ok((out, ev.stats))
}

struct Energy<'a> {
    arena: &'a Arena,
    c: u64,
    env: EnergyValuation,
    stats: EvalStats,
}

impl Energy<'_> {
    fn eval(&mut self, f: &Formula) -> Result<EnergyFunction> {
        let n = self.arena.num_states();
        if let Some(t) = literal_table(self.arena.vars(), f)? {
            let values = t
                .into_iter()
                .map(|b| if b { EnergyValue::ZERO } else { EnergyValue::INFINITY })
                .collect();
            return Ok(EnergyFunction { bound: self.c, values });
        }
        match f {
            Formula::Var(x) => self
                .env
                .get(x)
                .cloned()
                .ok_or_else(|| Error::UnboundVariable(x.clone())),
            Formula::And(a, b) => self.eval(a)?.meet(&self.eval(b)?),
            Formula::Or(a, b) => self.eval(a)?.join(&self.eval(b)?),
            Formula::Not(a) => Ok(self.eval(a)?.neg()),
            Formula::Diamond(a) => Ok(ecpre(self.arena, &self.eval(a)?)),
            Formula::Square(a) => Ok(ecpre_env(self.arena, &self.eval(a)?)),
            Formula::Fix(kind, x, body) => {
                let mut cur = match kind {
                    FixKind::Mu => EnergyFunction::infinity(self.c, n),
                    FixKind::Nu => EnergyFunction::zero(self.c, n),
                };
                let saved = self.env.remove(x);
                let cap = (n as u64).saturating_mul(self.c + 1);
                let mut changes = 0u64;
                let result = loop {
                    self.env.insert(x.clone(), cur.clone());
                    self.stats.body_evaluations += 1;
                    let next = self.eval(body)?;
                    if next == cur {
                        break cur;
                    }
                    // mu ascends from the bottom, nu descends from the top.
                    let chain_ok = match kind {
                        FixKind::Mu => cur.leq(&next)?,
                        FixKind::Nu => next.leq(&cur)?,
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
                Ok(result)
            }
            Formula::Atom(_) | Formula::NegAtom(_) | Formula::Prop(_) => unreachable!("literal"),
        }
    }
}

impl PartialOrd for EnergyFunction {
    /// The pointwise lattice order `⪯`; `None` for incomparable functions or
    /// functions at different bounds.
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        if self.bound != other.bound || self.values.len() != other.values.len() {
            return None;
        }
        match (self.leq(other).ok()?, other.leq(self).ok()?) {
            (true, true) => Some(Ordering::Equal),
            (true, false) => Some(Ordering::Less),
            (false, true) => Some(Ordering::Greater),
            (false, false) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assertion::Assertion;
    use crate::fixtures::g1;
    use crate::formula;
    use crate::game::{VariableSet, WeightRule};

    const INF: EnergyValue = EnergyValue::INFINITY;
    const Z: EnergyValue = EnergyValue::ZERO;

    fn v(x: u64) -> EnergyValue {
        EnergyValue::finite(x)
    }

    #[test]
    fn negation_table() {
        assert_eq!(Z.neg(8), INF);
        assert_eq!(INF.neg(8), Z);
        assert_eq!(v(3).neg(8), v(6));
        assert_eq!(v(8).neg(8), v(1));
    }

    #[test]
    fn lattice_operations() {
        let (f0, finf) = (EnergyFunction::zero(4, 3), EnergyFunction::infinity(4, 3));
        assert_eq!(f0.meet(&finf).unwrap(), finf);
        assert_eq!(f0.join(&finf).unwrap(), f0);
        let two = EnergyFunction::constant(4, 3, v(2));
        let three = EnergyFunction::constant(4, 3, v(3));
        assert_eq!(two.meet(&three).unwrap(), three);
        assert!(three.leq(&two).unwrap());
        assert!(finf.leq(&f0).unwrap());
        assert!(matches!(
            f0.join(&EnergyFunction::zero(5, 3)),
            Err(Error::BoundMismatch(4, 5))
        ));
    }

    #[test]
    fn ec_cases() {
        let g = g1();
        let (s, ty, tn) = (State(0), State(0b10), State(0b00));
        assert_eq!(ec_step(8, -2, v(3)), v(5));
        assert_eq!(ec(&g, 0, s, ty, Z).unwrap(), INF);
        assert_eq!(ec(&g, 2, s, tn, Z).unwrap(), Z);
        assert_eq!(ec(&g, 2, s, tn, INF).unwrap(), INF);
        let vars = VariableSet::new(vec!["x".into(), "y".into()], &["x".into()]).unwrap();
        let blocked = WeightedGameStructure::new(
            vars,
            Assertion::parse("!x'").unwrap(),
            Assertion::parse("!y'").unwrap(),
            vec![WeightRule {
                guard: Assertion::parse("true").unwrap(),
                weight: 0,
            }],
        )
        .unwrap();
        assert_eq!(ec(&blocked, 3, s, State(0b01), v(1)).unwrap(), Z);
        assert_eq!(ec(&blocked, 3, s, State(0b10), v(1)).unwrap(), INF);
        assert_eq!(ec_env(&blocked, 3, s, State(0b01), v(1)).unwrap(), INF);
        assert_eq!(ec_env(&blocked, 3, s, State(0b10), v(1)).unwrap(), Z);
    }

    #[test]
    fn ec_env_cases() {
        assert_eq!(ec_env_step(4, 3, Z), Z);
        assert_eq!(ec_env_step(4, -5, INF), Z);
        assert_eq!(ec_env_step(4, 0, INF), INF);
        assert_eq!(ec_env_step(4, -2, INF), v(3));
        assert_eq!(ec_env_step(4, -2, v(2)), Z);
        assert_eq!(ec_env_step(4, 2, v(3)), INF);
        assert_eq!(ec_env_step(4, 1, v(3)), v(4));
    }

    #[test]
    fn ecpre_on_g1() {
        let a = g1().arena().unwrap();
        let f0 = EnergyFunction::zero(2, 4);
        assert_eq!(ecpre(&a, &f0), f0);
        let finf = EnergyFunction::infinity(2, 4);
        assert_eq!(ecpre(&a, &finf), finf);
        let y_only = EnergyFunction::new(2, vec![INF, INF, Z, Z]).unwrap();
        assert!(ecpre(&a, &y_only).is_constant(v(1)));
        assert_eq!(ecpre_env(&a, &f0), f0);
        assert_eq!(ecpre_env(&a, &finf), finf);
    }

    #[test]
    fn g1_goldens() {
        let a = g1().arena().unwrap();
        let e = EnergyValuation::new();
        let b = formula::buchi(Formula::atom("y"));
        assert!(eval_energy(&a, 2, &formula::safety(), &e).unwrap().is_constant(Z));
        assert!(eval_energy(&a, 2, &b, &e).unwrap().is_constant(Z));
        assert!(eval_energy(&a, 0, &b, &e).unwrap().is_constant(INF));
    }

    #[test]
    fn serde_round_trip() {
        let f = EnergyFunction::new(3, vec![Z, v(3), INF]).unwrap();
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"bound":3,"values":[0,3,"inf"]}"#);
        assert_eq!(serde_json::from_str::<EnergyFunction>(&s).unwrap(), f);
    }
}
