use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn xikit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xikit")).args(args).output().expect("spawn xikit")
}

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("scenario.toml");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn malformed_config_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kind = \"finite\"\n[finite]\nn = \"eight\"\n");
    let out = xikit(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("finite.n"));
}

#[test]
fn inverted_interval_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kind = \"continuum\"\n[continuum]\nsupport = { a = 1.0, b = -1.0 }\n");
    let out = xikit(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("continuum.support.a"));
}

#[test]
fn missing_potential_table_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kind = \"schrodinger\"\n[schrodinger]\npotential = { table = \"nope.csv\" }\n");
    let out = xikit(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("schrodinger.potential.table"));
}

#[test]
fn finite_scenario_passes_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("finite");
    let out = xikit(&["run", scenario("finite.toml").to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = std::fs::read_to_string(out_dir.join("report.txt")).unwrap();
    assert_eq!(report.lines().count(), 5);
    assert!(report.lines().all(|l| l.ends_with("PASS")));
    let csv = std::fs::read_to_string(out_dir.join("data/xi_profile.csv")).unwrap();
    assert!(csv.starts_with("lambda,xi,trXiPlus,trXiMinus,minEigXiPlus,maxEigXiPlus"));
    assert_eq!(csv.lines().count(), 201);
}

#[test]
fn impossible_tolerance_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "kind = \"finite\"\n[finite]\npairs = 1\n[tolerances]\nkrein-resolvent = 1e-300\n");
    let out = xikit(&["run", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report = std::fs::read_to_string(dir.path().join("o/report.txt")).unwrap();
    assert!(report.lines().any(|l| l.starts_with("krein-resolvent") && l.ends_with("FAIL")));
}

#[test]
fn seeds_change_outputs_and_repeat_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, tag: &str| {
        let o = dir.path().join(tag);
        let out = xikit(&["run", scenario("averaging.toml").to_str().unwrap(), "--seed", seed, "--out", o.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        std::fs::read(o.join("data/averaging.csv")).unwrap()
    };
    let a = run("1", "a");
    let b = run("1", "b");
    let c = run("2", "c");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn threads_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_xikit"))
        .env("XIKIT_THREADS", "2")
        .args(["run", scenario("finite.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn list_checks_prints_catalogue() {
    let out = xikit(&["list-checks", "continuum"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for name in ["unitarity", "birman-krein", "lemma47", "strong-coupling-order", "simon-limit"] {
        assert!(text.contains(name), "missing {name}");
    }
    assert_eq!(xikit(&["list-checks", "quantum"]).status.code(), Some(2));
}
