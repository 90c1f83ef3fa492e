use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sandc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sandc")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn solve_prints_winner_score_and_states() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("chain.coins");
    // Two coins in a chain to the ground on both sides.
    fs::write(&g, "coins 2\nstring 0 ground 0\nstring 1 0 1\nstring 2 1 ground\n").unwrap();
    let o = sandc(&["solve", "--game", "sac", "--in", p(&g)]);
    assert!(o.status.success());
    let line = stdout(&o);
    assert!(line.starts_with("winner=P2 score=0-2 states="), "{line}");
    let o = sandc(&["solve", "--game", "nimstring", "--in", p(&g), "--first", "p2"]);
    assert!(stdout(&o).starts_with("winner=P2 "), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(sandc(&["verify", "lemma1"]).status.code(), Some(2));
    assert_eq!(sandc(&["solve", "--game", "chess", "--in", "x"]).status.code(), Some(2));
    assert_eq!(sandc(&["solve", "--game", "sac", "--in", "/no/such/file"]).status.code(), Some(2));
}

#[test]
fn verify_reports_json() {
    let o = sandc(&["verify", "lemma3", "--seed", "5", "--count", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["passed"], 10);
    assert_eq!(v["failed"], 0);
    let o = sandc(&["verify", "skip-dominance", "--max-n", "2", "--max-m", "2"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn compile_plan_and_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("pair.dnf");
    fs::write(&f, "x1 x2\n").unwrap();
    let lava = dir.path().join("lava.coins");
    let plan = dir.path().join("plan.json");
    let o = sandc(&[
        "reduce", "gamesat-to-lava", "--formula", p(&f), "--N", "2", "--first", "trudy", "--out", p(&lava), "--plan",
        p(&plan),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&lava).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("string")).count(), 265);
    let plan: serde_json::Value = serde_json::from_str(&fs::read_to_string(&plan).unwrap()).unwrap();
    assert!(plan.as_array().is_some_and(|a| !a.is_empty()) || plan.is_object());

    let out = dir.path().join("stages");
    let o = sandc(&["reduce", "pipeline", "--formula", p(&f), "--N", "2", "--first", "fallon", "--out-dir", p(&out)]);
    assert!(o.status.success());
    for name in ["lava.coins", "nimstring.coins", "sac.coins", "lava.plan.json"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let o = sandc(&["verify", "structure", "--formula", p(&f), "--N", "3", "--first", "fallon"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn play_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("pair.dnf");
    fs::write(&f, "x1 x2\n").unwrap();
    let lava = dir.path().join("lava.coins");
    let t = dir.path().join("game.txt");
    let o = sandc(&[
        "play", "--formula", p(&f), "--N", "2", "--first", "trudy", "--policy-a", "trudy", "--policy-b", "fallon",
        "--seed", "1", "--transcript", p(&t),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(summary["census"]["terminal"], "Fallon");

    sandc(&["reduce", "gamesat-to-lava", "--formula", p(&f), "--N", "2", "--first", "trudy", "--out", p(&lava)]);
    let o = sandc(&["replay", "--game", "lava", "--in", p(&lava), "--transcript", p(&t)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).starts_with("valid cuts="), "{}", stdout(&o));
    assert!(stdout(&o).contains("winner=P2"), "{}", stdout(&o));
}

#[test]
fn gen_and_export_dot() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.coins");
    let o = sandc(&["gen", "--kind", "graph", "--seed", "9", "--out", p(&g)]);
    assert!(o.status.success());
    let first = fs::read_to_string(&g).unwrap();
    sandc(&["gen", "--kind", "graph", "--seed", "9", "--out", p(&g)]);
    assert_eq!(fs::read_to_string(&g).unwrap(), first);
    let dot = dir.path().join("g.dot");
    let o = sandc(&["export-dot", "--in", p(&g), "--out", p(&dot)]);
    assert!(o.status.success());
    assert!(fs::read_to_string(&dot).unwrap().contains("graph"));
}
