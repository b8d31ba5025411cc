//! Seeded generators for games, formulas and energy functions used by the
//! differential harness, the property tests and the benchmarks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::assertion::Assertion;
use crate::energy::{EnergyFunction, EnergyValue};
use crate::formula::{self, FixKind, Formula};
use crate::game::{PriorityRule, VariableSet, WeightRule, WeightedGameStructure};
use crate::parity::{EnergyParityGame, Player};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GameShape {
    pub min_vars: usize,
    pub max_vars: usize,
    /// Weights are drawn from `[-max_weight, max_weight]`.
    pub max_weight: i64,
}

impl Default for GameShape {
    fn default() -> Self {
        GameShape {
            min_vars: 2,
            max_vars: 4,
            max_weight: 2,
        }
    }
}

fn var_names(n: usize, inputs: usize) -> (Vec<String>, Vec<String>) {
    let mut names = Vec::with_capacity(n);
    for i in 0..inputs {
        names.push(format!("x{i}"));
    }
    for i in 0..n - inputs {
        names.push(format!("y{i}"));
    }
    let ins = names[..inputs].to_vec();
    (names, ins)
}

/// A random assertion over `atoms` (name, primed) of at most the given depth.
pub fn random_assertion<R: Rng>(rng: &mut R, atoms: &[(String, bool)], depth: u32) -> Assertion {
    if depth == 0 || rng.gen_bool(0.35) {
        let (n, p) = atoms.choose(rng).expect("atoms");
        let a = if *p { Assertion::primed(n) } else { Assertion::var(n) };
        return if rng.gen_bool(0.4) { Assertion::not(a) } else { a };
    }
    let l = random_assertion(rng, atoms, depth - 1);
    let r = random_assertion(rng, atoms, depth - 1);
    match rng.gen_range(0..6) {
        0 | 1 => Assertion::and(l, r),
        2 | 3 => Assertion::or(l, r),
        4 => Assertion::Implies(Box::new(l), Box::new(r)),
        _ => Assertion::not(Assertion::and(l, r)),
    }
}

/// A random pure-state assertion over the variables.
pub fn random_state_assertion<R: Rng>(rng: &mut R, vars: &VariableSet, depth: u32) -> Assertion {
    let atoms: Vec<(String, bool)> = vars.names().iter().map(|n| (n.clone(), false)).collect();
    random_assertion(rng, &atoms, depth)
}

/// A random weighted game. Transition relations are permissive often enough
/// that most generated games have plays of interest, but deadlocks for
/// either player do occur.
pub fn random_game<R: Rng>(rng: &mut R, shape: &GameShape) -> WeightedGameStructure {
    let n = rng.gen_range(shape.min_vars..=shape.max_vars);
    let inputs = rng.gen_range(0..=n.min(2));
    let (names, ins) = var_names(n, inputs);
    let vars = VariableSet::new(names.clone(), &ins).expect("generated names are valid");
    let unprimed: Vec<(String, bool)> = names.iter().map(|v| (v.clone(), false)).collect();
    let mut env_atoms = unprimed.clone();
    env_atoms.extend(ins.iter().map(|v| (v.clone(), true)));
    let mut all_atoms = unprimed;
    all_atoms.extend(names.iter().map(|v| (v.clone(), true)));

    let rho_e = if inputs == 0 || rng.gen_bool(0.6) {
        Assertion::Const(true)
    } else {
        Assertion::or(
            random_assertion(rng, &env_atoms, 2),
            random_assertion(rng, &env_atoms, 1),
        )
    };
    let rho_s = if rng.gen_bool(0.4) {
        Assertion::Const(true)
    } else {
        Assertion::or(
            random_assertion(rng, &all_atoms, 2),
            random_assertion(rng, &all_atoms, 2),
        )
    };
    let k = shape.max_weight;
    let mut rules: Vec<WeightRule> = (0..rng.gen_range(0..=3))
        .map(|_| WeightRule {
            guard: random_assertion(rng, &all_atoms, 2),
            weight: rng.gen_range(-k..=k),
        })
        .collect();
    rules.push(WeightRule {
        guard: Assertion::Const(true),
        weight: rng.gen_range(-k..=k),
    });
    WeightedGameStructure::new(vars, rho_e, rho_s, rules).expect("generated game is well formed")
}

/// Random priorities partitioning the states into up to three classes by
/// one or two variables.
pub fn random_priorities<R: Rng>(rng: &mut R, vars: &VariableSet) -> Vec<PriorityRule> {
    let mut names: Vec<&String> = vars.names().iter().collect();
    names.shuffle(rng);
    let a = Assertion::var(names[0]);
    let rule = |guard, priority| PriorityRule { guard, priority };
    if names.len() >= 2 && rng.gen_bool(0.5) {
        let b = Assertion::var(names[1]);
        vec![
            rule(Assertion::and(a.clone(), b.clone()), rng.gen_range(0..4)),
            rule(Assertion::and(a.clone(), Assertion::not(b)), rng.gen_range(0..4)),
            rule(Assertion::not(a), rng.gen_range(0..4)),
        ]
    } else {
        vec![
            rule(a.clone(), rng.gen_range(0..4)),
            rule(Assertion::not(a), rng.gen_range(0..4)),
        ]
    }
}

/// Builtin condition kinds exercised by the differential harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Condition {
    Safety,
    Reachability,
    Buchi,
    CoBuchi,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Safety,
        Condition::Reachability,
        Condition::Buchi,
        Condition::CoBuchi,
    ];

    /// Instantiates the condition with a random state-predicate parameter.
    pub fn instantiate<R: Rng>(self, rng: &mut R, vars: &VariableSet) -> Formula {
        let mut param = || {
            let names = vars.names();
            match rng.gen_range(0..3) {
                0 => Formula::atom(names.choose(rng).expect("vars")),
                1 => Formula::NegAtom(names.choose(rng).expect("vars").clone()),
                _ => Formula::Prop(random_state_assertion(rng, vars, 2)),
            }
        };
        match self {
            Condition::Safety => formula::safety(),
            Condition::Reachability => formula::reachability(param()),
            Condition::Buchi => formula::buchi(param()),
            Condition::CoBuchi => formula::cobuchi(param()),
        }
    }
}

/// A random energy function at bound `c`, with `+inf` entries mixed in.
pub fn random_energy_function<R: Rng>(rng: &mut R, c: u64, n: usize) -> EnergyFunction {
    let values = (0..n)
        .map(|_| {
            if rng.gen_bool(0.2) {
                EnergyValue::INFINITY
            } else {
                EnergyValue::finite(rng.gen_range(0..=c))
            }
        })
        .collect();
    EnergyFunction::new(c, values).expect("values within bound")
}

/// A random function below `f` in the lattice order (pointwise integer >=).
pub fn random_below<R: Rng>(rng: &mut R, f: &EnergyFunction) -> EnergyFunction {
    let c = f.bound();
    let values = f
        .values()
        .iter()
        .map(|v| match v.get() {
            Some(x) if !rng.gen_bool(0.15) => EnergyValue::finite(rng.gen_range(x..=c)),
            _ => EnergyValue::INFINITY,
        })
        .collect();
    EnergyFunction::new(c, values).expect("values within bound")
}

/// A random closed, monotone formula with at most `depth` levels. Negations
/// only wrap closed subformulas, so bound variables always occur positively.
pub fn random_formula<R: Rng>(rng: &mut R, vars: &VariableSet, depth: u32) -> Formula {
    let mut counter = 0;
    gen_formula(rng, vars, depth, &mut Vec::new(), &mut counter)
}

fn gen_formula<R: Rng>(
    rng: &mut R,
    vars: &VariableSet,
    depth: u32,
    bound: &mut Vec<String>,
    counter: &mut usize,
) -> Formula {
    let leaf = |rng: &mut R, bound: &[String]| {
        if !bound.is_empty() && rng.gen_bool(0.5) {
            return Formula::Var(bound.choose(rng).expect("bound").clone());
        }
        let v = vars.names().choose(rng).expect("vars").clone();
        match rng.gen_range(0..5) {
            0 => Formula::Prop(Assertion::Const(rng.gen_bool(0.5))),
            1 | 2 => Formula::Atom(v),
            _ => Formula::NegAtom(v),
        }
    };
    if depth == 0 {
        return leaf(rng, bound);
    }
    match rng.gen_range(0..9) {
        0 => leaf(rng, bound),
        1 => Formula::and(
            gen_formula(rng, vars, depth - 1, bound, counter),
            gen_formula(rng, vars, depth - 1, bound, counter),
        ),
        2 => Formula::or(
            gen_formula(rng, vars, depth - 1, bound, counter),
            gen_formula(rng, vars, depth - 1, bound, counter),
        ),
        3 | 4 => Formula::diamond(gen_formula(rng, vars, depth - 1, bound, counter)),
        5 => Formula::square(gen_formula(rng, vars, depth - 1, bound, counter)),
        6 => {
            // Closed subformula under negation.
            let mut fresh = Vec::new();
            Formula::negate(gen_formula(rng, vars, depth - 1, &mut fresh, counter))
        }
        _ => {
            let name = format!("X{}", *counter);
            *counter += 1;
            let kind = if rng.gen_bool(0.5) { FixKind::Mu } else { FixKind::Nu };
            bound.push(name.clone());
            let body = gen_formula(rng, vars, depth - 1, bound, counter);
            bound.pop();
            Formula::Fix(kind, name, Box::new(body))
        }
    }
}

/// A random explicit energy parity game with `n` states, priorities below
/// `d` and weights in `[-k, k]`. Every state gets one to three successors.
pub fn random_energy_parity_game<R: Rng>(rng: &mut R, n: usize, d: u32, k: i64) -> EnergyParityGame {
    let mut g = EnergyParityGame::new();
    for _ in 0..n {
        let owner = if rng.gen_bool(0.5) { Player::Zero } else { Player::One };
        g.add_state(owner, rng.gen_range(0..d.max(1)));
    }
    for v in 0..n {
        let out = rng.gen_range(1..=3.min(n));
        let mut targets: Vec<usize> = (0..n).collect();
        targets.shuffle(rng);
        for &t in &targets[..out] {
            g.add_edge(v, t, rng.gen_range(-k..=k));
        }
    }
    g
}
