//! Seeded differential testing of the energy evaluator against the
//! brute-force oracles.
//!
//! Case `i` of a run with seed `s` draws everything from a ChaCha8 stream
//! seeded with `s` on stream `i`, so any case can be replayed on its own and
//! transcripts are byte-identical across runs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::{eval_energy_with_stats, EnergyFunction, EnergyValuation, EnergyValue};
use crate::error::{Error, Result};
use crate::formula::Formula;
use crate::game::WeightedGameStructure;
use crate::gamefile::save_game;
use crate::random::{random_game, random_priorities, Condition, GameShape};
use crate::reduction::{oracle_max_credit_env, oracle_min_credit_sys};
use crate::solver::crosscheck_parity;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Oracle {
    /// Credits read off the classical solution of the reduced game.
    Reduction,
    /// Explicit energy parity game solved by unfolding and Zielonka.
    Parity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckConfig {
    pub seed: u64,
    pub cases: usize,
    pub max_vars: usize,
    pub max_weight: i64,
    pub max_bound: u64,
    pub oracle: Oracle,
    /// Corrupts one evaluator result per case to make sure mismatches are caught.
    pub mutate: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            seed: 0,
            cases: 100,
            max_vars: 4,
            max_weight: 2,
            max_bound: 8,
            oracle: Oracle::Reduction,
            mutate: false,
        }
    }
}

/// The first failing comparison of a run, with enough to replay it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub case: usize,
    pub bound: u64,
    pub formula: Option<String>,
    /// The game in the JSON game format, with the failing formula attached.
    pub game_json: String,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    /// One line per case.
    pub transcript: Vec<String>,
    pub comparisons: usize,
    pub sys_mismatches: usize,
    pub env_mismatches: usize,
    pub parity_mismatches: usize,
    /// Solves whose two winning regions failed to partition the states.
    pub partition_violations: usize,
    /// Evaluator or oracle errors, including iteration-cap and chain violations.
    pub errors: usize,
    /// Largest fixpoint change count relative to its cap, as `(changes, cap)`.
    pub peak_iterations: (u64, u64),
    pub first_failure: Option<Counterexample>,
}

impl CheckReport {
    pub fn failures(&self) -> usize {
        self.sys_mismatches + self.env_mismatches + self.parity_mismatches + self.partition_violations + self.errors
    }

    pub fn passed(&self) -> bool {
        self.failures() == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "{} comparisons, {} failures (sys {}, env {}, parity {}, partition {}, errors {})",
            self.comparisons,
            self.failures(),
            self.sys_mismatches,
            self.env_mismatches,
            self.parity_mismatches,
            self.partition_violations,
            self.errors
        )
    }
}

/// The generator state for case `index` of a run seeded with `seed`.
pub fn case_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn corrupt(f: &mut EnergyFunction) {
    let v = if f.get(0).is_infinite() {
        EnergyValue::ZERO
    } else {
        EnergyValue::INFINITY
    };
    f.set(0, v);
}

fn diff(a: &EnergyFunction, b: &EnergyFunction) -> Vec<usize> {
    (0..a.len()).filter(|&s| a.get(s) != b.get(s)).collect()
}

struct Case<'a> {
    report: &'a mut CheckReport,
    index: usize,
    game: WeightedGameStructure,
    bound: u64,
    marks: Vec<String>,
}

impl Case<'_> {
    fn fail(&mut self, formula: Option<&Formula>, detail: String) {
        if self.report.first_failure.is_none() {
            let mut g = self.game.clone();
            if let Some(f) = formula {
                g = g.with_formula(f.clone());
            }
            self.report.first_failure = Some(Counterexample {
                case: self.index,
                bound: self.bound,
                formula: formula.map(|f| f.to_string()),
                game_json: save_game(&g),
                detail,
            });
        }
    }

    fn note_iterations(&mut self, changes: u64) {
        let cap = (self.game.num_states() as u64) * (self.bound + 1);
        let (pc, pk) = self.report.peak_iterations;
        // Compare changes / cap as fractions.
        if pk == 0 || (changes as u128) * (pk as u128) > (pc as u128) * (cap as u128) {
            self.report.peak_iterations = (changes, cap);
        }
    }

    fn error(&mut self, formula: Option<&Formula>, what: &str, e: Error) -> String {
        self.report.errors += 1;
        self.fail(formula, format!("{what}: {e}"));
        "error".into()
    }

    fn reduction(&mut self, rng: &mut ChaCha8Rng, mutate: bool) {
        let arena = match self.game.arena() {
            Ok(a) => a,
            Err(e) => {
                let m = self.error(None, "arena", e);
                self.marks.push(m);
                return;
            }
        };
        let c = self.bound;
        for (i, cond) in Condition::ALL.into_iter().enumerate() {
            let f = cond.instantiate(rng, self.game.vars());
            let label = format!("{cond:?}").to_lowercase();
            self.report.comparisons += 2;
            let direct = eval_energy_with_stats(&arena, c, &f, &EnergyValuation::new());
            let oracle = oracle_min_credit_sys(&arena, c, &f);
            let mut sys_ok = false;
            let mut direct_credits = None;
            match (direct, oracle) {
                (Ok((mut d, stats)), Ok(o)) => {
                    self.note_iterations(stats.peak());
                    if mutate && i == 0 {
                        corrupt(&mut d);
                    }
                    let bad = diff(&d, &o);
                    sys_ok = bad.is_empty();
                    if !sys_ok {
                        self.report.sys_mismatches += 1;
                        self.fail(
                            Some(&f),
                            format!("evaluator {d} vs reduction oracle {o} at states {bad:?}"),
                        );
                    }
                    direct_credits = Some(d);
                }
                (Err(e), _) => {
                    self.error(Some(&f), "evaluator", e);
                }
                (_, Err(e)) => {
                    self.error(Some(&f), "reduction oracle", e);
                }
            }
            let dual = f.dual();
            let env_direct = eval_energy_with_stats(&arena, c, &dual, &EnergyValuation::new());
            let env_oracle = oracle_max_credit_env(&arena, c, &dual);
            let mut env_ok = false;
            match (env_direct, env_oracle) {
                (Ok((d, stats)), Ok(o)) => {
                    self.note_iterations(stats.peak());
                    let bad = diff(&d, &o);
                    env_ok = bad.is_empty();
                    if !env_ok {
                        self.report.env_mismatches += 1;
                        self.fail(
                            Some(&dual),
                            format!("evaluator {d} vs environment oracle {o} at states {bad:?}"),
                        );
                    }
                    if let Some(sys) = &direct_credits {
                        let n = sys.len();
                        let overlap_or_gap = (0..n).any(|s| sys.get(s).is_finite() == (d.get(s) == EnergyValue::ZERO));
                        if overlap_or_gap {
                            self.report.partition_violations += 1;
                            self.fail(Some(&f), format!("regions do not partition: credits {sys}, dual {d}"));
                            env_ok = false;
                        }
                    }
                }
                (Err(e), _) => {
                    self.error(Some(&dual), "evaluator", e);
                }
                (_, Err(e)) => {
                    self.error(Some(&dual), "environment oracle", e);
                }
            }
            let mark = match (sys_ok, env_ok) {
                (true, true) => "ok",
                (false, true) => "SYS-MISMATCH",
                (true, false) => "ENV-MISMATCH",
                (false, false) => "MISMATCH",
            };
            self.marks.push(format!("{label}={mark}"));
        }
    }

    fn parity(&mut self, rng: &mut ChaCha8Rng, mutate: bool) {
        let rules = random_priorities(rng, self.game.vars());
        self.game = match self.game.clone().with_priorities(rules) {
            Ok(g) => g,
            Err(e) => {
                let m = self.error(None, "priorities", e);
                self.marks.push(m);
                return;
            }
        };
        self.report.comparisons += 1;
        match crosscheck_parity(&self.game, self.bound) {
            Ok(mut x) => {
                if mutate {
                    corrupt(&mut x.symbolic);
                    x.mismatches = (0..x.explicit.len())
                        .filter(|&s| x.symbolic.get(s) != x.explicit[s])
                        .collect();
                }
                if x.agrees() {
                    self.marks.push("parity=ok".into());
                } else {
                    self.report.parity_mismatches += 1;
                    let f = crate::formula::parity(self.game.priorities().expect("attached")).ok();
                    let detail = format!(
                        "symbolic {} vs explicit {:?} at states {:?}",
                        x.symbolic,
                        x.explicit.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
                        x.mismatches
                    );
                    self.fail(f.as_ref(), detail);
                    self.marks.push("parity=MISMATCH".into());
                }
            }
            Err(e) => {
                let m = self.error(None, "parity crosscheck", e);
                self.marks.push(format!("parity={m}"));
            }
        }
    }
}

/// Runs one case and appends its transcript line.
pub fn run_case(cfg: &CheckConfig, index: usize, report: &mut CheckReport) {
    let mut rng = case_rng(cfg.seed, index);
    let shape = GameShape {
        min_vars: 2.min(cfg.max_vars),
        max_vars: cfg.max_vars,
        max_weight: cfg.max_weight,
    };
    let game = random_game(&mut rng, &shape);
    let bound = rng.gen_range(0..=cfg.max_bound);
    let mut case = Case {
        report,
        index,
        game: game.clone(),
        bound,
        marks: Vec::new(),
    };
    match cfg.oracle {
        Oracle::Reduction => case.reduction(&mut rng, cfg.mutate),
        Oracle::Parity => case.parity(&mut rng, cfg.mutate),
    }
    let line = format!(
        "case {index}: vars={} inputs={} K={} c={} {}",
        game.vars().len(),
        game.vars().inputs().len(),
        game.max_abs_weight(),
        bound,
        case.marks.join(" ")
    );
    report.transcript.push(line);
}

/// Runs all cases of the configuration in index order.
pub fn run_check(cfg: &CheckConfig) -> Result<CheckReport> {
    if cfg.max_vars < 1 || cfg.max_vars > 12 {
        return Err(Error::InvalidVariables(format!(
            "--max-vars must be between 1 and 12, got {}",
            cfg.max_vars
        )));
    }
    if cfg.max_weight < 0 {
        return Err(Error::InvalidCredit("maximum weight must be non-negative".into()));
    }
    let mut report = CheckReport::default();
    for i in 0..cfg.cases {
        run_case(cfg, i, &mut report);
    }
    Ok(report)
}
