//! Decision and minimum-credit problems for finite and unbounded energy
//! accumulation, winning regions, environment-side credits and sufficient
//! bounds.

use serde::{Deserialize, Serialize};

use crate::arena::Arena;
use crate::assertion::{Assertion, AtomScope};
use crate::classical::StateSet;
use crate::energy::{eval_energy_with_stats, EnergyFunction, EnergyValuation, EnergyValue};
use crate::error::{Error, Result};
use crate::formula::{self, Formula, FormulaMetrics, Fragment};
use crate::game::{Bound, WeightedGameStructure};
use crate::parity::{from_parity_wgs, solve_energy_parity};

/// Version of the serialized report layout.
pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone)]
pub struct SolveRequest {
    pub game: WeightedGameStructure,
    pub formula: Formula,
    pub bound: Bound,
    /// Restricts the decision to the states satisfying this assertion.
    pub query: Option<Assertion>,
}

impl SolveRequest {
    pub fn new(game: WeightedGameStructure, formula: Formula, bound: Bound) -> Self {
        SolveRequest {
            game,
            formula,
            bound,
            query: None,
        }
    }

    pub fn with_query(mut self, query: Assertion) -> Self {
        self.query = Some(query);
        self
    }
}

/// Which sufficient-bound formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundVariant {
    /// `d (N^2 + N - 1) K` for games annotated with `d` priorities.
    Parity,
    /// `2 (N^2 + N - 1) K` for the Büchi formula.
    Buchi,
    /// `(d + 1) ((N^2 + N) m - 1) K`.
    General,
}

/// The inputs and result of the sufficient-bound computation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundBreakdown {
    /// Number of states `N`.
    pub states: u64,
    /// Largest absolute weight `K`.
    pub max_weight: u64,
    /// Formula length `m` (node count).
    pub length: u64,
    /// Alternation depth, or the number of priorities for parity games.
    pub depth: u64,
    pub variant: BoundVariant,
    pub bound: u64,
    /// Largest minimum credit a state can need once the bound is sufficient.
    pub credit_cap: u64,
}

fn checked(parts: &[u64]) -> Result<u64> {
    parts
        .iter()
        .try_fold(1u64, |acc, &x| acc.checked_mul(x))
        .ok_or(Error::Overflow)
}

/// A bound above which bounded and unbounded energy winning coincide for
/// `game` and `f`. Never below `K`. The most specific applicable variant is
/// used: parity when the game carries priorities, then Büchi.
pub fn sufficient_bound(game: &WeightedGameStructure, f: &Formula) -> Result<BoundBreakdown> {
    let variant = if game.priorities().is_some() {
        BoundVariant::Parity
    } else if formula::buchi_target(f).is_some() {
        BoundVariant::Buchi
    } else {
        BoundVariant::General
    };
    bound_for(game, f, variant)
}

/// Every variant that applies to `game` and `f`, general first.
pub fn applicable_bounds(game: &WeightedGameStructure, f: &Formula) -> Result<Vec<BoundBreakdown>> {
    let mut out = vec![bound_for(game, f, BoundVariant::General)?];
    if formula::buchi_target(f).is_some() {
        out.push(bound_for(game, f, BoundVariant::Buchi)?);
    }
    if game.priorities().is_some() {
        out.push(bound_for(game, f, BoundVariant::Parity)?);
    }
    Ok(out)
}

/// The bound of one variant. The caller decides whether it applies; the
/// parity variant needs priorities on the game.
pub fn bound_for(game: &WeightedGameStructure, f: &Formula, variant: BoundVariant) -> Result<BoundBreakdown> {
    let n = game.num_states() as u64;
    let k = game.max_abs_weight();
    let metrics = f.metrics();
    let m = metrics.length as u64;
    let nn = n.checked_mul(n).ok_or(Error::Overflow)?;
    let (depth, factor, base) = match variant {
        BoundVariant::Parity => {
            let mut prios = game.priority_vector()?;
            prios.sort_unstable();
            prios.dedup();
            let d = prios.len() as u64;
            (d, d, nn + n - 1)
        }
        BoundVariant::Buchi => (2, 2, nn + n - 1),
        BoundVariant::General => {
            let d = metrics.alternation_depth as u64;
            let nm = checked(&[nn + n, m])?;
            (d, d + 1, nm - 1)
        }
    };
    let credit_cap = checked(&[base, k])?;
    let bound = checked(&[factor, base, k])?.max(k);
    Ok(BoundBreakdown {
        states: n,
        max_weight: k,
        length: m,
        depth,
        variant,
        bound,
        credit_cap,
    })
}

/// Per-state line of a report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StateCredit {
    pub index: usize,
    /// The state as a conjunction of literals.
    pub label: String,
    pub credit: EnergyValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryResult {
    pub assertion: String,
    pub states: Vec<usize>,
    /// Whether the system wins from every queried state.
    pub wins: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveReport {
    pub schema: u32,
    pub formula: String,
    pub requested_bound: Bound,
    /// The bound the evaluation ran at: the requested one, or the sufficient
    /// bound when the request is unbounded.
    pub effective_bound: u64,
    /// Present for unbounded requests. Reported credits are then valid for
    /// unbounded accumulation but are not claimed to be minimal there.
    pub breakdown: Option<BoundBreakdown>,
    pub min_credits: EnergyFunction,
    pub sys_region: StateSet,
    pub env_region: StateSet,
    pub metrics: FormulaMetrics,
    /// Largest number of value-changing iterations of any fixpoint.
    pub peak_iterations: u64,
    /// `N (c + 1)`.
    pub iteration_cap: u64,
    pub states: Vec<StateCredit>,
    pub query: Option<QueryResult>,
}

impl SolveReport {
    /// Decision for the query if any, otherwise whether some state wins.
    pub fn system_wins(&self) -> bool {
        match &self.query {
            Some(q) => q.wins,
            None => !self.sys_region.is_empty(),
        }
    }
}

fn require_sys_formula(f: &Formula) -> Result<()> {
    if let Some(x) = f.free_vars().into_iter().next() {
        return Err(Error::NotClosed(x));
    }
    f.check_monotone()?;
    match f.fragment() {
        Fragment::Sys | Fragment::Both => Ok(()),
        other => Err(Error::WrongFragment {
            found: other.to_string(),
            expected: "sys or both".into(),
        }),
    }
}

/// Environment-side view of a system formula at bound `c`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvCredits {
    /// Value of the negation normal form of `!f`.
    pub dual: EnergyFunction,
    /// Largest credit from which the environment still wins, `None` if it
    /// wins from no credit in `[0, c]`.
    pub max_env_credit: Vec<Option<u64>>,
    /// System minimum credits recovered from `dual`: `0 -> +inf`,
    /// `+inf -> 0`, otherwise `c + 1 - g`.
    pub recovered: EnergyFunction,
}

pub fn env_max_credit(arena: &Arena, c: u64, f: &Formula) -> Result<EnvCredits> {
    let (dual, _) = eval_energy_with_stats(arena, c, &f.dual(), &EnergyValuation::new())?;
    let max_env_credit = dual.values().iter().map(|g| g.get().map(|g| c - g)).collect();
    let recovered = dual.neg();
    Ok(EnvCredits {
        dual,
        max_env_credit,
        recovered,
    })
}

/// `W_sys = {s | f(s) != +inf}` and `W_env = {s | dual(s) = 0}`, checked
/// to partition the state space.
pub fn winning_regions(arena: &Arena, c: u64, f: &Formula) -> Result<(StateSet, StateSet)> {
    let (credits, _) = eval_energy_with_stats(arena, c, f, &EnergyValuation::new())?;
    let env = env_max_credit(arena, c, f)?;
    regions_of(&credits, &env.dual)
}

fn regions_of(credits: &EnergyFunction, dual: &EnergyFunction) -> Result<(StateSet, StateSet)> {
    let n = credits.len();
    let sys = StateSet::from_fn(n, |s| credits.get(s).is_finite());
    let env = StateSet::from_fn(n, |s| dual.get(s) == EnergyValue::ZERO);
    if !sys.is_disjoint(&env) || !sys.union(&env).is_full() {
        return Err(Error::Consistency(format!(
            "winning regions do not partition the states: |W_sys| = {}, |W_env| = {}, N = {n}",
            sys.count(),
            env.count()
        )));
    }
    Ok((sys, env))
}

/// Solves the request: evaluates the formula at the requested bound (or at
/// the sufficient bound when unbounded), derives both winning regions and
/// cross-checks the direct credits against the environment-side recovery.
pub fn solve(req: &SolveRequest) -> Result<SolveReport> {
    require_sys_formula(&req.formula)?;
    req.game.validate_weights()?;
    let (c, breakdown) = match req.bound {
        Bound::Finite(c) => (c, None),
        Bound::Infinite => {
            let b = sufficient_bound(&req.game, &req.formula)?;
            (b.bound, Some(b))
        }
    };
    let arena = req.game.arena()?;
    let (credits, stats) = eval_energy_with_stats(&arena, c, &req.formula, &EnergyValuation::new())?;
    let env = env_max_credit(&arena, c, &req.formula)?;
    if env.recovered != credits {
        let bad: Vec<usize> = (0..credits.len())
            .filter(|&s| env.recovered.get(s) != credits.get(s))
            .collect();
        return Err(Error::Consistency(format!(
            "environment-side recovery disagrees with direct credits at states {bad:?}"
        )));
    }
    let (sys_region, env_region) = regions_of(&credits, &env.dual)?;
    let vars = req.game.vars();
    let states = (0..credits.len())
        .map(|s| StateCredit {
            index: s,
            label: vars.describe(crate::game::State(s as u32)),
            credit: credits.get(s),
        })
        .collect();
    let query = match &req.query {
        None => None,
        Some(a) => {
            let b = a.bind(vars, AtomScope::State)?;
            let hits: Vec<usize> = (0..credits.len()).filter(|&s| b.holds(s as u32, 0)).collect();
            let wins = !hits.is_empty() && hits.iter().all(|&s| sys_region.contains(s));
            Some(QueryResult {
                assertion: a.to_string(),
                states: hits,
                wins,
            })
        }
    };
    Ok(SolveReport {
        schema: REPORT_SCHEMA,
        formula: req.formula.to_string(),
        requested_bound: req.bound,
        effective_bound: c,
        breakdown,
        min_credits: credits,
        sys_region,
        env_region,
        metrics: req.formula.metrics(),
        peak_iterations: stats.peak(),
        iteration_cap: (arena.num_states() as u64).saturating_mul(c + 1),
        states,
        query,
    })
}

/// Symbolic and explicit credits of a parity-annotated game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityCrosscheck {
    pub symbolic: EnergyFunction,
    pub explicit: Vec<EnergyValue>,
    /// States where the two pipelines disagree.
    pub mismatches: Vec<usize>,
}

impl ParityCrosscheck {
    pub fn agrees(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares the energy μ-calculus parity formula evaluated on the symbolic
/// game with the explicit energy parity game solved by unfolding.
pub fn crosscheck_parity(game: &WeightedGameStructure, c: u64) -> Result<ParityCrosscheck> {
    let rules = game.priorities().ok_or(Error::NoPriorities)?;
    let f = formula::parity(rules)?;
    let arena = game.arena()?;
    let (symbolic, _) = eval_energy_with_stats(&arena, c, &f, &EnergyValuation::new())?;
    let explicit_all = solve_energy_parity(&from_parity_wgs(game)?, c)?;
    let explicit = explicit_all[..game.num_states()].to_vec();
    let mismatches = (0..explicit.len())
        .filter(|&s| symbolic.get(s) != explicit[s])
        .collect();
    Ok(ParityCrosscheck {
        symbolic,
        explicit,
        mismatches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{g1, g1_buchi_priorities};

    fn buchi_y() -> Formula {
        formula::buchi(Formula::atom("y"))
    }

    #[test]
    fn g1_bounds() {
        let g = g1();
        assert_eq!(sufficient_bound(&g, &formula::safety()).unwrap().bound, 118);
        let b = sufficient_bound(&g, &buchi_y()).unwrap();
        assert_eq!((b.bound, b.variant, b.credit_cap), (38, BoundVariant::Buchi, 19));
        let p = sufficient_bound(&g1_buchi_priorities(), &buchi_y()).unwrap();
        assert_eq!((p.bound, p.variant, p.depth), (38, BoundVariant::Parity, 2));
    }

    #[test]
    fn general_bound_for_fixpoint_free_formula() {
        let vars = crate::game::VariableSet::new(vec!["x".into()], &[]).unwrap();
        let g = WeightedGameStructure::new(
            vars,
            Assertion::Const(true),
            Assertion::Const(true),
            vec![crate::game::WeightRule {
                guard: Assertion::Const(true),
                weight: -3,
            }],
        )
        .unwrap();
        // N = 2, m = 1, d = 0: (0 + 1)((4 + 2) * 1 - 1) * 3 = 15.
        assert_eq!(sufficient_bound(&g, &Formula::atom("x")).unwrap().bound, 15);
    }

    #[test]
    fn g1_solves() {
        let q = Assertion::parse("x & y").unwrap();
        let r2 = solve(&SolveRequest::new(g1(), buchi_y(), Bound::Finite(2)).with_query(q.clone())).unwrap();
        assert!(r2.min_credits.is_constant(EnergyValue::ZERO));
        assert!(r2.system_wins());
        assert!(r2.sys_region.is_full() && r2.env_region.is_empty());
        let r0 = solve(&SolveRequest::new(g1(), buchi_y(), Bound::Finite(0)).with_query(q)).unwrap();
        assert!(r0.min_credits.is_constant(EnergyValue::INFINITY));
        assert!(!r0.system_wins());
        assert!(r0.env_region.is_full());
        let ri = solve(&SolveRequest::new(g1(), buchi_y(), Bound::Infinite)).unwrap();
        assert_eq!(ri.effective_bound, 38);
        assert!(ri.min_credits.is_constant(EnergyValue::ZERO));
    }

    #[test]
    fn env_credit_recovery() {
        let a = g1().arena().unwrap();
        let e2 = env_max_credit(&a, 2, &buchi_y()).unwrap();
        assert!(e2.dual.is_constant(EnergyValue::INFINITY));
        assert!(e2.max_env_credit.iter().all(Option::is_none));
        assert!(e2.recovered.is_constant(EnergyValue::ZERO));
        let e0 = env_max_credit(&a, 0, &buchi_y()).unwrap();
        assert!(e0.dual.is_constant(EnergyValue::ZERO));
        assert!(e0.max_env_credit.iter().all(|&m| m == Some(0)));
        assert!(e0.recovered.is_constant(EnergyValue::INFINITY));
    }

    #[test]
    fn env_deadlock_everywhere_favours_the_system() {
        let vars = crate::game::VariableSet::new(vec!["x".into(), "y".into()], &["x".into()]).unwrap();
        let g = WeightedGameStructure::new(
            vars,
            Assertion::Const(false),
            Assertion::Const(true),
            vec![crate::game::WeightRule {
                guard: Assertion::Const(true),
                weight: -1,
            }],
        )
        .unwrap();
        let (sys, env) = winning_regions(&g.arena().unwrap(), 1, &formula::safety()).unwrap();
        assert!(sys.is_full() && env.is_empty());
    }

    #[test]
    fn solver_rejects_env_formulas() {
        let r = solve(&SolveRequest::new(g1(), buchi_y().dual(), Bound::Finite(1)));
        assert!(matches!(r, Err(Error::WrongFragment { .. })));
    }

    #[test]
    fn parity_pipelines_agree_on_g1() {
        for c in [0, 1, 2] {
            let x = crosscheck_parity(&g1_buchi_priorities(), c).unwrap();
            assert!(x.agrees(), "c={c}: {x:?}");
        }
    }

    #[test]
    fn report_json_round_trip() {
        let r = solve(&SolveRequest::new(g1(), buchi_y(), Bound::Infinite)).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with("{\"schema\":1,"));
        assert_eq!(serde_json::from_str::<SolveReport>(&s).unwrap(), r);
    }
}
