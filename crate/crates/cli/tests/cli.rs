use std::process::{Command, Output};

fn hisa(args: &[&str], out: &std::path::Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hisa"))
        .args(args)
        .arg("--out-dir")
        .arg(out)
        .output()
        .unwrap()
}

fn files(dir: &std::path::Path) -> Vec<String> {
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .map(|it| it.map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect())
        .unwrap_or_default();
    names.sort();
    names
}

#[test]
fn infeasible_bench_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = hisa(&["bench", "--B", "128", "--m", "4", "--k", "2048"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mB >= k"));
    assert!(files(dir.path()).is_empty());
}

#[test]
fn bad_flag_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(hisa(&["bench", "--frobnicate"], dir.path()).status.code(), Some(2));
    assert_eq!(hisa(&["niah", "--format", "xml"], dir.path()).status.code(), Some(2));
}

#[test]
fn bench_writes_one_row_per_strategy_and_length() {
    let dir = tempfile::tempdir().unwrap();
    let out = hisa(
        &["bench", "--lengths", "4096..8192", "--queries", "2", "--reps", "1", "--warmup", "0"],
        dir.path(),
    );
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "strategy,L,B,m,k,H,d,wall_ns_median,wall_ns_p10,wall_ns_p90,dot_products,analytic_bound"
    );
    assert_eq!(lines.count(), 6);
}

#[test]
fn bench_ratio_mode_recomputes_m() {
    let dir = tempfile::tempdir().unwrap();
    let out = hisa(
        &[
            "bench", "--mode", "ratio", "--ratio", "4", "--lengths", "65536", "--strategies", "hisa", "--queries",
            "1", "--reps", "1", "--warmup", "0",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("bench.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[..5], ["HISA", "65536", "128", "128", "2048"]);
}

#[test]
fn niah_single_strategy_writes_one_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = hisa(&["niah", "--strategies", "hisa", "--seeds", "10", "--lengths", "1024"], dir.path());
    assert!(out.status.success());
    assert_eq!(files(dir.path()), ["niah_hisa.csv", "niah_hisa.dat"]);
    let csv = std::fs::read_to_string(dir.path().join("niah_hisa.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 * 10);
}

#[test]
fn audit_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert!(hisa(&["audit", "--instances", "50"], dir.path()).status.success());
    let bad = hisa(&["audit", "--instances", "50", "--inject-tie-mismatch"], dir.path());
    assert_eq!(bad.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&bad.stdout).contains("counterexample: check=regime-equivalence seed="));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"B": 64, "m": 2, "k": 2048}"#).unwrap();
    let out_dir = dir.path().join("out");
    let cfg = cfg.to_str().unwrap();
    assert_eq!(hisa(&["bench", "--config", cfg], &out_dir).status.code(), Some(1));
    let ok = hisa(
        &["bench", "--config", cfg, "--m", "32", "--lengths", "4096", "--queries", "1", "--reps", "1", "--warmup", "0"],
        &out_dir,
    );
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
}
