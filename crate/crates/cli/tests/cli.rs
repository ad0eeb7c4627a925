use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nlrd(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlrd"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn manifest(dir: &Path, sub: &str) -> serde_json::Value {
    let text = fs::read_to_string(dir.join(format!("{sub}.manifest.json"))).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn validate_default_passes_and_writes_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlrd(dir.path(), &["validate"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("condition"));
    let csv = fs::read_to_string(dir.path().join("validate.csv")).unwrap();
    let mut lines = csv.lines();
    let m = manifest(dir.path(), "validate");
    assert_eq!(lines.next().unwrap(), format!("# manifest: {}", m["hash"].as_str().unwrap()));
    assert_eq!(lines.next().unwrap(), "condition,lhs,rhs,relation,pass,required");
    assert_eq!(m["outputs"], serde_json::json!(["validate.csv"]));
}

#[test]
fn shipped_default_config_matches_builtin() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nlrd(dir.path(), &["validate"]).status.code(), Some(0));
    let builtin = manifest(dir.path(), "validate")["config_hash"].clone();
    let cfg = config("default.cfg");
    let out = nlrd(dir.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(manifest(dir.path(), "validate")["config_hash"], builtin);
}

#[test]
fn shipped_configs_validate() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["default.cfg", "multiplicative.cfg", "general.cfg"] {
        let cfg = config(name);
        let out = nlrd(dir.path(), &["validate", "--config", cfg.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn unknown_config_key_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(config("default.cfg")).unwrap();
    let bad = dir.path().join("bad.cfg");
    fs::write(&bad, text.replace("m = 1.0", "m = 1.0\nmu = 3.0")).unwrap();
    let out = nlrd(dir.path(), &["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mu"));
}

#[test]
fn epsilon_without_noise_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlrd(dir.path(), &["simulate", "--noise", "none", "--epsilon", "0.1"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("epsilon requires a noise kind"));
}

#[test]
fn bad_flags_exit_64_and_help_exits_0() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(nlrd(dir.path(), &["simulate", "--noise", "pink"]).status.code(), Some(64));
    assert_eq!(nlrd(dir.path(), &["teleport"]).status.code(), Some(64));
    assert_eq!(nlrd(dir.path(), &["--help"]).status.code(), Some(0));
    // 0.05 is not on the dyadic default grid.
    let out = nlrd(dir.path(), &["simulate", "--noise", "diffq", "--delta", "0.05"]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn divergence_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("unstable.cfg");
    let text = fs::read_to_string(config("default.cfg")).unwrap();
    fs::write(&cfg, text.replace("kind = \"sine\"", "kind = \"linear\"\nslope = 400.0")).unwrap();
    let out = nlrd(
        dir.path(),
        &["simulate", "--config", cfg.to_str().unwrap(), "--t1", "4", "--ic-amplitude", "1"],
    );
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn simulate_columns_and_precision() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlrd(
        dir.path(),
        &["simulate", "--noise", "ou", "--epsilon", "0.2", "--modes", "4", "--t1", "0.25"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("simulate.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert!(lines[0].starts_with("# manifest: "));
    assert_eq!(lines[1], "t,l2_norm,h1_norm,l_value,a_value,c1,c2,c3,c4");
    // 0.25 at dt = 1/1024 is 256 steps plus the initial state.
    assert_eq!(lines.len(), 2 + 257);
    let first: Vec<f64> = lines[2].split(',').map(|c| c.parse().unwrap()).collect();
    assert_eq!(first[0], 0.0);
    assert_eq!(first[1], 1.0);
    assert_eq!(first[5], 1.0);
    for cell in lines[3].split(',') {
        let mantissa = cell.split('e').next().unwrap().trim_start_matches('-');
        assert_eq!(mantissa.len(), 18, "{cell}");
    }
}

fn run_all(dir: &Path, workers: &str) {
    let cmds: [&[&str]; 5] = [
        &["converge", "--deltas", "0.25,0.125", "--t1", "0.5"],
        &["aux-limit", "--deltas", "0.1,0.05"],
        &["attractor", "--noise", "diffq", "--epsilon", "0.1", "--times", "1,2", "--n-ics", "8"],
        &["semidist", "--deltas", "0.25,0.125", "--times", "1,2", "--n-ics", "8"],
        &["absorb", "--pullback", "4", "--n-ics", "6"],
    ];
    for cmd in cmds {
        let mut args = cmd.to_vec();
        args.extend(["--workers", workers, "--seed", "11"]);
        let out = nlrd(dir, &args);
        assert_eq!(out.status.code(), Some(0), "{cmd:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn outputs_are_byte_identical_across_runs_and_workers() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    run_all(a.path(), "1");
    run_all(b.path(), "1");
    run_all(c.path(), "4");
    let mut names: Vec<_> = fs::read_dir(a.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 10);
    for name in names {
        let x = fs::read(a.path().join(&name)).unwrap();
        assert_eq!(x, fs::read(b.path().join(&name)).unwrap(), "{name:?} differs between reruns");
        assert_eq!(x, fs::read(c.path().join(&name)).unwrap(), "{name:?} differs across worker counts");
    }
}

#[test]
fn seed_and_params_change_the_hash() {
    let dir = tempfile::tempdir().unwrap();
    let hash = |args: &[&str]| {
        assert_eq!(nlrd(dir.path(), args).status.code(), Some(0));
        manifest(dir.path(), "aux")["hash"].as_str().unwrap().to_string()
    };
    let h0 = hash(&["aux"]);
    assert_eq!(h0, hash(&["aux", "--workers", "3"]));
    assert_ne!(h0, hash(&["aux", "--seed", "8"]));
    assert_ne!(h0, hash(&["aux", "--t1", "0.5"]));
}

#[test]
fn noise_check_reports_all_kinds() {
    let dir = tempfile::tempdir().unwrap();
    let out = nlrd(dir.path(), &["noise-check", "--deltas", "0.1,0.05"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("noise_check.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let kinds: Vec<&str> = v["reports"].as_array().unwrap().iter().map(|r| r["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["ou", "mollifier", "diffq"]);
    assert_eq!(v["manifest"], manifest(dir.path(), "noise-check")["hash"]);
}

#[test]
fn absorb_with_general_config_uses_general_radius() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("general.cfg");
    let out = nlrd(
        dir.path(),
        &["absorb", "--config", cfg.to_str().unwrap(), "--pullback", "4", "--n-ics", "4"],
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(dir.path().join("absorb.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["radius"]["formula"], "general");
    assert_eq!(v["check"]["pass"], true);
}

#[test]
fn semidist_rejects_general_coupling() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("general.cfg");
    let out = nlrd(dir.path(), &["semidist", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
}
