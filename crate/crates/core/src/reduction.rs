//! Reduction of a weighted game at a finite bound to a plain game whose
//! states carry the current credit in extra output bits, and the two
//! brute-force credit oracles built on it.
//!
//! A reduced state `(s, k)` sits at index `s | k << |V|`. The system may move
//! from `(s, k1)` to `(t, k2)` iff it may move from `s` to `t` in the original
//! game, both credits lie in `[0, c]`, and `k1 + w(s, t) >= k2`. Codes above
//! `c` are dead: they have no system successor and are never queried.

use crate::arena::{Arena, ArenaBuilder};
use crate::assertion::Assertion;
use crate::classical::{eval_classical_with_stats, EvalStats, SetValuation, StateSet};
use crate::energy::{EnergyFunction, EnergyValue};
use crate::error::{Error, Result};
use crate::formula::{Formula, Fragment};
use crate::game::{VariableSet, WeightRule, WeightedGameStructure, MAX_VARS};

#[derive(Debug, Clone)]
pub struct ReducedGame {
    arena: Arena,
    original_vars: usize,
    bound: u64,
    credit_vars: Vec<String>,
}

/// Number of bits encoding credits `0..=c` (at least one).
pub fn credit_bits(c: u64) -> usize {
    (64 - c.leading_zeros() as usize).max(1)
}

fn credit_var_names(vars: &VariableSet, bits: usize) -> Vec<String> {
    let mut prefix = String::from("k");
    loop {
        let names: Vec<String> = (0..bits).map(|i| format!("{prefix}{i}")).collect();
        if names.iter().all(|n| vars.index_of(n).is_none()) {
            return names;
        }
        prefix.insert(0, '_');
    }
}

fn reduced_vars(vars: &VariableSet, c: u64) -> Result<(VariableSet, Vec<String>)> {
    let bits = credit_bits(c);
    if vars.len() + bits > MAX_VARS {
        return Err(Error::StateCap {
            count: vars.len() + bits,
            cap: MAX_VARS,
        });
    }
    let credit = credit_var_names(vars, bits);
    let mut names = vars.names().to_vec();
    names.extend(credit.iter().cloned());
    Ok((VariableSet::new(names, &vars.inputs())?, credit))
}

/// Builds the reduced game at bound `c` directly from the explicit arena.
pub fn reduce(arena: &Arena, c: u64) -> Result<ReducedGame> {
    let vars = arena.vars();
    let nv = vars.len();
    let (star_vars, credit_vars) = reduced_vars(vars, c)?;
    let codes = 1u64 << credit_bits(c);
    let mut b = ArenaBuilder::new(star_vars);
    for k1 in 0..codes {
        for s in 0..arena.num_states() {
            for m in arena.moves(s) {
                b.begin_move(m.input);
                if k1 > c {
                    continue;
                }
                for k2 in 0..=c {
                    for (&t, &w) in m.succs.iter().zip(m.weights) {
                        if k1 as i128 + w as i128 >= k2 as i128 {
                            b.push_succ(t | (k2 as u32) << nv, 0);
                        }
                    }
                }
            }
            b.end_state();
        }
    }
    Ok(ReducedGame {
        arena: b.finish(),
        original_vars: nv,
        bound: c,
        credit_vars,
    })
}

/// The same reduction expressed as a symbolic game: `rho_s` of the result
/// conjoins the original `rho_s` with range guards and a case split over
/// credit pairs and first-matching weight rules. Intended for cross-checking
/// [`reduce`]; the assertion grows with `c^2` times the number of rules.
pub fn reduce_symbolic(game: &WeightedGameStructure, c: u64) -> Result<WeightedGameStructure> {
    let (star_vars, credit_vars) = reduced_vars(game.vars(), c)?;
    let code = |k: u64, primed: bool| {
        credit_vars
            .iter()
            .enumerate()
            .map(|(i, n)| {
                let lit = if primed {
                    Assertion::primed(n)
                } else {
                    Assertion::var(n)
                };
                if k >> i & 1 == 1 {
                    lit
                } else {
                    Assertion::not(lit)
                }
            })
            .reduce(Assertion::and)
            .expect("at least one bit")
    };
    // first[i]: rule i is the first rule whose guard holds.
    let rules = game.weight_rules();
    let first: Vec<Assertion> = (0..rules.len())
        .map(|i| {
            rules[..i]
                .iter()
                .map(|r| Assertion::not(r.guard.clone()))
                .fold(rules[i].guard.clone(), Assertion::and)
        })
        .collect();
    let mut cases = Vec::new();
    for k1 in 0..=c {
        for k2 in 0..=c {
            let need = k2 as i128 - k1 as i128;
            let ok: Vec<Assertion> = rules
                .iter()
                .zip(&first)
                .filter(|(r, _)| r.weight as i128 >= need)
                .map(|(_, f)| f.clone())
                .collect();
            if let Some(w) = ok.into_iter().reduce(Assertion::or) {
                cases.push(Assertion::and(Assertion::and(code(k1, false), code(k2, true)), w));
            }
        }
    }
    let credit_ok = cases
        .into_iter()
        .reduce(Assertion::or)
        .unwrap_or(Assertion::Const(false));
    WeightedGameStructure::new(
        star_vars,
        game.rho_e().clone(),
        Assertion::and(game.rho_s().clone(), credit_ok),
        vec![WeightRule {
            guard: Assertion::Const(true),
            weight: 0,
        }],
    )
}

impl ReducedGame {
    pub fn arena(&self) -> &Arena {
        &self.arena
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn credit_vars(&self) -> &[String] {
        &self.credit_vars
    }

    /// Index of `(s, k)`.
    pub fn index(&self, s: usize, k: u64) -> usize {
        s | (k as usize) << self.original_vars
    }

    /// Credits in `[0, c]` at which `s` belongs to `set`.
    pub fn credits_in(&self, set: &StateSet, s: usize) -> Vec<u64> {
        (0..=self.bound).filter(|&k| set.contains(self.index(s, k))).collect()
    }

    fn original_states(&self) -> usize {
        1 << self.original_vars
    }
}

fn require_closed(f: &Formula) -> Result<()> {
    match f.free_vars().into_iter().next() {
        Some(x) => Err(Error::NotClosed(x)),
        None => Ok(()),
    }
}

/// Minimum credits of a system formula, read off the classical winning set
/// of the reduced game: the least credit `k` with `(s, k)` winning, `+inf`
/// if there is none. The winning credits must be upward closed.
pub fn oracle_min_credit_sys(arena: &Arena, c: u64, f: &Formula) -> Result<EnergyFunction> {
    oracle_min_credit_sys_with_stats(arena, c, f).map(|(r, _)| r)
}

pub fn oracle_min_credit_sys_with_stats(arena: &Arena, c: u64, f: &Formula) -> Result<(EnergyFunction, EvalStats)> {
    require_closed(f)?;
    let frag = f.fragment();
    if !matches!(frag, Fragment::Sys | Fragment::Both) {
        return Err(Error::WrongFragment {
            found: frag.to_string(),
            expected: "sys or both".into(),
        });
    }
    let red = reduce(arena, c)?;
    let (win, stats) = eval_classical_with_stats(red.arena(), f, &SetValuation::new())?;
    let mut values = Vec::with_capacity(red.original_states());
    for s in 0..red.original_states() {
        let ks = red.credits_in(&win, s);
        let v = match ks.first() {
            None => EnergyValue::INFINITY,
            Some(&k0) => {
                if ks.len() as u64 != c + 1 - k0 {
                    return Err(Error::Consistency(format!(
                        "winning credits {ks:?} of state {s} are not upward closed"
                    )));
                }
                EnergyValue::finite(k0)
            }
        };
        values.push(v);
    }
    Ok((EnergyFunction::new(c, values)?, stats))
}

/// Environment credits of an environment formula. If the credits from which
/// the environment wins are exactly `0..m`, the result is `c + 1 - m`
/// (so `0` when the environment wins for every credit) and `+inf` when it
/// wins for none. The winning credits must be downward closed.
pub fn oracle_max_credit_env(arena: &Arena, c: u64, f: &Formula) -> Result<EnergyFunction> {
    oracle_max_credit_env_with_stats(arena, c, f).map(|(r, _)| r)
}

pub fn oracle_max_credit_env_with_stats(arena: &Arena, c: u64, f: &Formula) -> Result<(EnergyFunction, EvalStats)> {
    require_closed(f)?;
    let frag = f.fragment();
    if !matches!(frag, Fragment::Env | Fragment::Both) {
        return Err(Error::WrongFragment {
            found: frag.to_string(),
            expected: "env or both".into(),
        });
    }
    let red = reduce(arena, c)?;
    let (win, stats) = eval_classical_with_stats(red.arena(), f, &SetValuation::new())?;
    let mut values = Vec::with_capacity(red.original_states());
    for s in 0..red.original_states() {
        let ks = red.credits_in(&win, s);
        let m = ks.len() as u64;
        if ks.iter().enumerate().any(|(i, &k)| k != i as u64) {
            return Err(Error::Consistency(format!(
                "environment-winning credits {ks:?} of state {s} are not downward closed"
            )));
        }
        values.push(if m == 0 {
            EnergyValue::INFINITY
        } else {
            EnergyValue::finite(c + 1 - m)
        });
    }
    Ok((EnergyFunction::new(c, values)?, stats))
}
