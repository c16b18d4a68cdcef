use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teamcount"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value<'a>(report: &'a str, key: &str) -> &'a str {
    report
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no `{key}` in\n{report}"))
}

fn setup() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("clause.cnf"), "p cnf 2 1\n1 2 0\n").unwrap();
    std::fs::write(dir.path().join("r.txt"), "domain 2\nrel R/1\n1\n").unwrap();
    std::fs::write(dir.path().join("dep.tl"), "A y. E z. (dep(y;z) & (R(z) | x=z))\n").unwrap();
    dir
}

#[test]
fn inclusion_builtin_counts_one_clause() {
    let dir = setup();
    let o = run(dir.path(), &["reduce", "encode-2cnf+", "--formula", "clause.cnf", "--output", "s.txt"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(dir.path(), &["count-teams", "--structure", "s.txt", "--formula", "builtin:incl-2cnf+", "--vars", "t"]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&o), "result.count"), "3");
}

#[test]
fn dependence_reduction_emits_dimacs_and_verdict() {
    let dir = setup();
    let o = run(dir.path(), &["reduce", "dep2cnf", "--structure", "r.txt", "--formula", "dep.tl", "--vars", "x", "--verify"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("p cnf 14 "));
    assert_eq!(value(&out, "verify"), "OK");
    assert_eq!(value(&out, "star_count"), value(&out, "team_count"));
}

#[test]
fn empty_team_satisfies_any_formula() {
    let dir = setup();
    for f in ["x!=x", "dep(x;y) & !R(x)", "inc(x;y) | ind(x||y)", "A z. (z=x & z!=x)"] {
        let o = run(dir.path(), &["eval", "--structure", "r.txt", "--formula", f, "--team", "empty", "--vars", "x,y", "-q"]);
        assert_eq!(stdout(&o), "true\n", "{f}");
    }
}

#[test]
fn reports_are_deterministic_apart_from_timing() {
    let dir = setup();
    let args = ["verify", "--structure", "r.txt", "--formula", "dep.tl", "--vars", "x", "--team", "full"];
    let strip = |o: &Output| -> String {
        stdout(o).lines().filter(|l| !l.starts_with("time.")).map(|l| format!("{l}\n")).collect()
    };
    let (a, b) = (run(dir.path(), &args), run(dir.path(), &args));
    assert!(a.status.success());
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn chain_steps_agree() {
    let dir = setup();
    std::fs::write(
        dir.path().join("d.graph"),
        "digraph\nvertex a\nvertex b\nvertex c\nab a b\nba b a\nbc b c\ncb c b\nca c a\nac a c\n",
    )
    .unwrap();
    let o = run(dir.path(), &["chain", "--graph", "d.graph", "--verify", "--output", "steps"]);
    assert!(o.status.success());
    let out = stdout(&o);
    // Without loops, only the two directed triangles cover all three vertices.
    assert_eq!(value(&out, "step.1.count"), "2");
    assert_eq!(value(&out, "result.count"), "2");
    assert!(dir.path().join("steps/combined.cnf").is_file());
}

#[test]
fn count_sat_modes() {
    let dir = setup();
    std::fs::write(dir.path().join("g.cnf"), "p cnf 3 2\ne 3 0\n-1 3 0\n-2 -3 0\n").unwrap();
    for (mode, want) in [("all", "4"), ("projected", "3"), ("star", "2")] {
        let o = run(dir.path(), &["count-sat", "--formula", "g.cnf", "--mode", mode, "--verify"]);
        assert!(o.status.success());
        assert_eq!(value(&stdout(&o), "result.count"), want, "{mode}");
    }
    let o = run(dir.path(), &["count-sat", "--formula", "g.cnf", "--method", "star-reduction", "-q"]);
    assert_eq!(stdout(&o), "3\n");
}

#[test]
fn exit_codes() {
    let dir = setup();
    assert_eq!(run(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["count-teams", "--formula", "x=x"]).status.code(), Some(2));
    assert_eq!(run(dir.path(), &["builtin", "nope"]).status.code(), Some(2));
    let missing = run(dir.path(), &["count-teams", "--structure", "missing.txt", "--formula", "x=x"]);
    assert_eq!(missing.status.code(), Some(3));
    let budget = run(dir.path(), &["count-teams", "--structure", "r.txt", "--formula", "x=y", "--vars", "x,y", "--budget", "3"]);
    assert_eq!(budget.status.code(), Some(3));
}

#[test]
fn builtin_listing() {
    let dir = setup();
    let out = stdout(&run(dir.path(), &["builtin"]));
    assert_eq!(value(&out, "result.names"), "incl-2cnf+,dep-2cnf+,sigma11-cnfneg,myopic-dualhorn");
    assert_eq!(value(&out, "sigma11-cnfneg.relations"), "T/1");
}
