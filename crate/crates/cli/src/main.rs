//! `emu`: solve energy μ-calculus games from the command line.
//!
//! Exit codes: 0 the system wins (or the command succeeded), 1 the system
//! loses, 2 usage or input error, 3 internal consistency failure or oracle
//! mismatch.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use emu_core::check::{run_check, CheckConfig, CheckReport, Oracle};
use emu_core::formula;
use emu_core::gamefile::{load_game, load_priorities};
use emu_core::solver::{applicable_bounds, solve, sufficient_bound, BoundVariant, SolveReport, SolveRequest};
use emu_core::{Assertion, Bound, Error, Formula, State, StateSet, WeightedGameStructure};

#[derive(Parser, Debug)]
#[command(
    name = "emu",
    version,
    about = "Energy mu-calculus solver for omega-regular energy games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Minimum initial credits and winning regions.
    Solve(SolveArgs),
    /// Sufficient bound for unbounded energy accumulation.
    Bound(GameArgs),
    /// Randomized differential test against a brute-force oracle.
    Check(CheckArgs),
    /// Winning regions of both players as lists of states.
    Region(SolveArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum OracleArg {
    Reduction,
    Parity,
}

#[derive(Args, Debug)]
struct GameArgs {
    /// Game file (JSON).
    game: PathBuf,
    /// Formula text.
    #[arg(long, group = "source")]
    formula: Option<String>,
    /// File containing the formula text.
    #[arg(long, group = "source")]
    formula_file: Option<PathBuf>,
    /// Builtin formula: safety, reach, buchi, cobuchi, dual-buchi.
    #[arg(long, group = "source")]
    builtin: Option<String>,
    /// Builtin parameter `key=value`, e.g. `J=y`.
    #[arg(long = "param", value_name = "KEY=VALUE", requires = "builtin")]
    params: Vec<String>,
    /// Priority file replacing the game's priorities.
    #[arg(long)]
    priorities: Option<PathBuf>,
    /// Warn on stderr about weight rules shadowed by earlier ones.
    #[arg(long)]
    warn_overlaps: bool,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    game: GameArgs,
    /// Energy bound: a natural number or `inf`.
    #[arg(long, default_value = "inf")]
    bound: Bound,
    /// Restrict the decision to the states satisfying this assertion.
    #[arg(long)]
    state: Option<String>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    cases: usize,
    #[arg(long, default_value_t = 4)]
    max_vars: usize,
    #[arg(long, default_value_t = 2)]
    max_weight: i64,
    #[arg(long, default_value_t = 8)]
    max_bound: u64,
    #[arg(long, value_enum, default_value_t = OracleArg::Reduction)]
    oracle: OracleArg,
    /// Corrupt the evaluator's results to exercise mismatch reporting.
    #[arg(long)]
    mutate: bool,
    /// Directory for the first counterexample (default: current directory).
    #[arg(long)]
    dump_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Consistency(_) | Error::IterationCap { .. } | Error::ChainViolation { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn load(args: &GameArgs) -> Result<(WeightedGameStructure, Formula), Failure> {
    let mut game = load_game(&read(&args.game)?).map_err(|e| usage(format!("{}: {e}", args.game.display())))?;
    if let Some(p) = &args.priorities {
        let rules = load_priorities(&read(p)?).map_err(|e| usage(format!("{}: {e}", p.display())))?;
        game = game.with_priorities(rules)?;
        game.priority_vector()?;
    }
    if args.warn_overlaps {
        for w in game.lint_weight_overlaps() {
            eprintln!("emu: warning: {w}");
        }
    }
    let formula = if let Some(text) = &args.formula {
        Formula::parse(text).map_err(|e| usage(format!("formula: {e}")))?
    } else if let Some(path) = &args.formula_file {
        Formula::parse(read(path)?.trim()).map_err(|e| usage(format!("{}: {e}", path.display())))?
    } else if let Some(name) = &args.builtin {
        let params = args
            .params
            .iter()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.to_string()))
                    .ok_or_else(|| usage(format!("--param expects KEY=VALUE, got `{kv}`")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        formula::builtin(name, &params)?
    } else if let Some(f) = game.formula() {
        f.clone()
    } else {
        return Err(usage(
            "no formula: pass --formula, --formula-file or --builtin, or add `formula` to the game file",
        ));
    };
    Ok((game, formula))
}

fn state_list(game: &WeightedGameStructure, set: &StateSet) -> Vec<String> {
    set.iter().map(|s| game.vars().describe(State(s as u32))).collect()
}

fn variant_name(v: BoundVariant) -> &'static str {
    match v {
        BoundVariant::Parity => "parity",
        BoundVariant::Buchi => "buchi",
        BoundVariant::General => "general",
    }
}

fn solve_request(args: &SolveArgs) -> Result<(WeightedGameStructure, SolveReport), Failure> {
    let (game, f) = load(&args.game)?;
    let mut req = SolveRequest::new(game.clone(), f, args.bound);
    if let Some(q) = &args.state {
        let a = Assertion::parse(q).map_err(|e| usage(format!("--state: {e}")))?;
        req = req.with_query(a);
    }
    let report = solve(&req)?;
    if let Some(q) = &report.query {
        if q.states.is_empty() {
            return Err(usage(format!("--state `{}` matches no state", q.assertion)));
        }
    }
    Ok((game, report))
}

fn cmd_solve(args: &SolveArgs) -> Result<(String, u8), Failure> {
    let (_, r) = solve_request(args)?;
    let code = if r.system_wins() { 0 } else { 1 };
    if args.game.format == Format::Json {
        return Ok((
            serde_json::to_string_pretty(&r).expect("report serializes") + "\n",
            code,
        ));
    }
    let mut out = String::new();
    writeln!(out, "formula: {}", r.formula).unwrap();
    match &r.breakdown {
        None => writeln!(out, "bound: {}", r.effective_bound).unwrap(),
        Some(b) => writeln!(
            out,
            "bound: inf (evaluated at sufficient bound {}, {} variant; winning credits need at most {})",
            b.bound,
            variant_name(b.variant),
            b.credit_cap
        )
        .unwrap(),
    }
    let width = r.states.iter().map(|s| s.label.len()).max().unwrap_or(0);
    let shown: Vec<usize> = match &r.query {
        Some(q) => q.states.clone(),
        None => (0..r.states.len()).collect(),
    };
    writeln!(out, "credits:").unwrap();
    for &i in &shown {
        let s = &r.states[i];
        writeln!(out, "  {:<width$}  {}", s.label, s.credit).unwrap();
    }
    let n = r.states.len();
    writeln!(out, "W_sys: {} of {n} states", r.sys_region.count()).unwrap();
    writeln!(out, "W_env: {} of {n} states", r.env_region.count()).unwrap();
    if let Some(q) = &r.query {
        let verdict = if q.wins { "system wins" } else { "system loses" };
        writeln!(out, "query {}: {verdict}", q.assertion).unwrap();
    }
    Ok((out, code))
}

fn cmd_region(args: &SolveArgs) -> Result<(String, u8), Failure> {
    let (game, r) = solve_request(args)?;
    let sys = state_list(&game, &r.sys_region);
    let env = state_list(&game, &r.env_region);
    let n = r.states.len();
    if args.game.format == Format::Json {
        let v = json!({
            "schema": 1,
            "formula": r.formula,
            "effective_bound": r.effective_bound,
            "states": n,
            "sys_region": sys,
            "env_region": env,
        });
        return Ok((serde_json::to_string_pretty(&v).expect("json") + "\n", 0));
    }
    let mut out = String::new();
    writeln!(out, "bound: {}", r.effective_bound).unwrap();
    for (name, list) in [("W_sys", &sys), ("W_env", &env)] {
        writeln!(out, "{name} ({} of {n}):", list.len()).unwrap();
        for s in list {
            writeln!(out, "  {s}").unwrap();
        }
    }
    writeln!(out, "total: {} + {} = {n}", sys.len(), env.len()).unwrap();
    Ok((out, 0))
}

fn cmd_bound(args: &GameArgs) -> Result<(String, u8), Failure> {
    let (game, f) = load(args)?;
    let selected = sufficient_bound(&game, &f)?;
    let variants = applicable_bounds(&game, &f)?;
    if args.format == Format::Json {
        let v = json!({
            "schema": 1,
            "formula": f.to_string(),
            "selected": selected,
            "variants": variants,
        });
        return Ok((serde_json::to_string_pretty(&v).expect("json") + "\n", 0));
    }
    let mut out = String::new();
    let m = f.metrics();
    writeln!(out, "formula: {f}").unwrap();
    writeln!(
        out,
        "N = {}  K = {}  m = {}  d = {}",
        selected.states, selected.max_weight, m.length, m.alternation_depth
    )
    .unwrap();
    for v in &variants {
        writeln!(
            out,
            "{:<8} bound {} (credit cap {})",
            variant_name(v.variant),
            v.bound,
            v.credit_cap
        )
        .unwrap();
    }
    writeln!(out, "bound: {}", selected.bound).unwrap();
    Ok((out, 0))
}

fn cmd_check(args: &CheckArgs) -> Result<(String, u8), Failure> {
    let cfg = CheckConfig {
        seed: args.seed,
        cases: args.cases,
        max_vars: args.max_vars,
        max_weight: args.max_weight,
        max_bound: args.max_bound,
        oracle: match args.oracle {
            OracleArg::Reduction => Oracle::Reduction,
            OracleArg::Parity => Oracle::Parity,
        },
        mutate: args.mutate,
    };
    let report = run_check(&cfg)?;
    let mut dumped = None;
    if let Some(cx) = &report.first_failure {
        let dir = args.dump_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&dir).map_err(|e| usage(format!("cannot create {}: {e}", dir.display())))?;
        let game_path = dir.join(format!("counterexample-seed{}-case{}.game", args.seed, cx.case));
        fs::write(&game_path, &cx.game_json)
            .map_err(|e| usage(format!("cannot write {}: {e}", game_path.display())))?;
        dumped = Some(game_path);
    }
    let code = if report.passed() { 0 } else { 3 };
    Ok((render_check(args, &report, dumped.as_deref()), code))
}

fn render_check(args: &CheckArgs, report: &CheckReport, dumped: Option<&Path>) -> String {
    if args.format == Format::Json {
        let v = json!({
            "schema": 1,
            "seed": args.seed,
            "cases": args.cases,
            "oracle": format!("{:?}", args.oracle).to_lowercase(),
            "comparisons": report.comparisons,
            "failures": report.failures(),
            "sys_mismatches": report.sys_mismatches,
            "env_mismatches": report.env_mismatches,
            "parity_mismatches": report.parity_mismatches,
            "partition_violations": report.partition_violations,
            "errors": report.errors,
            "transcript": report.transcript,
            "counterexample": report.first_failure.as_ref().map(|cx| json!({
                "case": cx.case,
                "bound": cx.bound,
                "formula": cx.formula,
                "detail": cx.detail,
                "game_file": dumped.map(|p| p.display().to_string()),
            })),
        });
        return serde_json::to_string_pretty(&v).expect("json") + "\n";
    }
    let mut out = String::new();
    for line in &report.transcript {
        writeln!(out, "{line}").unwrap();
    }
    writeln!(out, "{}", report.summary()).unwrap();
    if let Some(cx) = &report.first_failure {
        writeln!(
            out,
            "first failure: case {} at bound {}: {}",
            cx.case, cx.bound, cx.detail
        )
        .unwrap();
        if let Some(p) = dumped {
            writeln!(out, "counterexample written to {}", p.display()).unwrap();
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Region(a) => cmd_region(a),
        Command::Bound(a) => cmd_bound(a),
        Command::Check(a) => cmd_check(a),
    };
    match result {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("emu: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
