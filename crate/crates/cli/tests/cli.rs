use std::fs;
use std::process::{Command, Output};

fn firelab(args: &[&str], cache: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_firelab"))
        .args(args)
        .env("FIRELAB_CACHE_DIR", cache)
        .output()
        .expect("spawn firelab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn growth_prints_volumes() {
    let dir = tempfile::tempdir().unwrap();
    let o = firelab(&["growth", "F2", "3"], dir.path());
    assert!(o.status.success());
    assert_eq!(stdout(&o), "R,v\n0,1\n1,5\n2,17\n3,53\n");
}

#[test]
fn simulate_writes_identical_csv_twice() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(
        &cfg,
        "[game]\ngroup = Z^2\nfire = radius:0\nstrategy = greedy:seed=3\nbudget = const:2\nhorizon = 10\n\n[report]\nradii = 5, 10\noutput = run.csv\n",
    )
    .unwrap();
    let o = firelab(&["simulate", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let first = fs::read_to_string(dir.path().join("run.csv")).unwrap();
    assert!(first.starts_with("turn,burned_total,burned_new,protected_this_turn,protected_total,unburnt_frac_r5,unburnt_frac_r10\n"));
    assert_eq!(first.lines().count(), 11);
    let o = firelab(&["simulate", cfg.to_str().unwrap(), "--output", "-"], dir.path());
    assert_eq!(stdout(&o), first);
}

#[test]
fn shield_verify_reports_budget_per_turn() {
    let dir = tempfile::tempdir().unwrap();
    let o = firelab(&["shield-verify", "3", "8"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    assert_eq!(out.lines().filter(|l| l.ends_with(",true")).count(), 8);
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    assert!(firelab(&["cache", "build", "Z2wrZ", "4"], dir.path()).status.success());
    let o = firelab(&["cache", "verify", "Z2wrZ", "4"], dir.path());
    assert!(stdout(&o).starts_with("ok "));
    let o = firelab(&["cache", "list"], dir.path());
    assert!(stdout(&o).contains("R=4"));
}

#[test]
fn bad_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(firelab(&["growth", "Q7", "2"], dir.path()).status.code(), Some(2));
    assert_eq!(firelab(&["simulate", "/nonexistent.cfg"], dir.path()).status.code(), Some(2));
}
