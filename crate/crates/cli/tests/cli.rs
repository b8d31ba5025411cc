use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use emu_core::solver::SolveReport;
use emu_core::EnergyValue;

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn emu_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emu"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("emu runs")
}

fn emu(args: &[&str]) -> Output {
    emu_in(&fixtures(), args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden(name: &str) -> String {
    std::fs::read_to_string(fixtures().join("golden").join(name)).unwrap()
}

#[test]
fn solve_matches_goldens() {
    let o = emu(&["solve", "g1.game", "--bound", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), golden("g1_solve_c2.txt"));
    let o = emu(&["solve", "g1.game", "--bound", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), golden("g1_solve_c0.txt"));
}

#[test]
fn bound_reports_every_variant() {
    let o = emu(&["bound", "g1.game"]);
    assert_eq!(stdout(&o), golden("g1_bound.txt"));
    let o = emu(&["bound", "g1.game", "--priorities", "g1.prio"]);
    let text = stdout(&o);
    assert!(text.contains("parity   bound 38"), "{text}");
    assert!(text.ends_with("bound: 38\n"));
    let o = emu(&["bound", "g1.game", "--builtin", "safety", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["selected"]["bound"], 118);
    assert_eq!(v["selected"]["variant"], "general");
}

#[test]
fn json_report_round_trips() {
    let o = emu(&["solve", "g1.game", "--bound", "0", "--format", "json"]);
    let text = stdout(&o);
    let report: SolveReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.schema, 1);
    assert!(report.min_credits.values().iter().all(|v| *v == EnergyValue::INFINITY));
    assert_eq!(report.env_region.count(), 4);
    assert_eq!(serde_json::to_string_pretty(&report).unwrap() + "\n", text);
}

#[test]
fn formula_sources() {
    let by_text = emu(&[
        "solve",
        "g1.game",
        "--bound",
        "2",
        "--formula",
        "nu Z . mu Y . ((y & <>Z) | <>Y)",
    ]);
    let by_builtin = emu(&[
        "solve",
        "g1.game",
        "--bound",
        "2",
        "--builtin",
        "buchi",
        "--param",
        "J=y",
    ]);
    assert_eq!(stdout(&by_text), golden("g1_solve_c2.txt"));
    assert_eq!(stdout(&by_builtin), golden("g1_solve_c2.txt"));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("f.mu");
    std::fs::write(&path, "mu X . (x & y | <>X)\n").unwrap();
    let o = emu(&[
        "solve",
        "g1.game",
        "--bound",
        "1",
        "--formula-file",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("formula: mu X . "));
}

#[test]
fn state_queries() {
    let o = emu(&["solve", "g1.game", "--bound", "2", "--state", "x & y"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("query x & y: system wins"));
    let o = emu(&["solve", "g1.game", "--bound", "0", "--state", "!y"]);
    assert_eq!(o.status.code(), Some(1));
    let o = emu(&["solve", "g1.game", "--bound", "2", "--state", "x & !x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_2() {
    for args in [
        &["solve", "missing.game"][..],
        &["solve", "g1.game", "--formula", "mu X ."],
        &["solve", "g1.game", "--bound", "-1"],
        &["solve", "g1.game", "--builtin", "nonsense"],
        &["solve", "g1.game", "--builtin", "buchi", "--param", "Q=y"],
        &["solve", "g1.game", "--formula", "X"],
        &["solve", "g1.game", "--formula", "[]y"],
        &["solve", "g1.game", "--formula", "y", "--builtin", "safety"],
        &["bound", "g1.game", "--priorities", "missing.prio"],
        &["check", "--max-vars", "0"],
        &["frobnicate"],
    ] {
        let o = emu(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn region_lists_both_players() {
    let o = emu(&["region", "g1.game", "--bound", "2"]);
    assert_eq!(stdout(&o), golden("g1_region_c2.txt"));
    let o = emu(&["region", "g1.game", "--bound", "0", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["sys_region"].as_array().unwrap().len(), 0);
    assert_eq!(v["env_region"].as_array().unwrap().len(), 4);
}

#[test]
fn check_transcripts_are_reproducible() {
    let args = ["check", "--seed", "42", "--cases", "25"];
    let a = emu(&args);
    let b = emu(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stdout(&a));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 26);
    assert!(text.ends_with("200 comparisons, 0 failures (sys 0, env 0, parity 0, partition 0, errors 0)\n"));
    let other = emu(&["check", "--seed", "43", "--cases", "25"]);
    assert_ne!(a.stdout, other.stdout);

    let p = emu(&[
        "check", "--seed", "42", "--cases", "25", "--oracle", "parity", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&p)).unwrap();
    assert_eq!(v["failures"], 0);
    assert_eq!(v["transcript"].as_array().unwrap().len(), 25);
}

#[test]
fn mutation_is_detected_and_dumped() {
    let dir = tempfile::tempdir().unwrap();
    let o = emu_in(dir.path(), &["check", "--cases", "5", "--mutate", "--dump-dir", "cx"]);
    assert_eq!(o.status.code(), Some(3));
    let text = stdout(&o);
    assert!(text.contains("first failure: case 0"), "{text}");
    let dumped: Vec<_> = std::fs::read_dir(dir.path().join("cx")).unwrap().collect();
    assert_eq!(dumped.len(), 1);
    let path = dumped[0].as_ref().unwrap().path();

    // The dumped game carries the failing formula and is solvable on its own.
    let game = std::fs::read_to_string(&path).unwrap();
    assert!(game.contains("\"formula\""));
    let o = emu_in(dir.path(), &["solve", path.to_str().unwrap(), "--bound", "3"]);
    assert!(matches!(o.status.code(), Some(0 | 1)), "{}", stderr(&o));
}
