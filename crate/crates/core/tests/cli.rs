use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const LINEAR: &str = r#"{
  "schema_version": 1,
  "path": {"kind": "linear", "params": {"n_steps": 1024, "T": 1, "d": 1}},
  "ladder": {"rule": "dyadic", "from": 1, "to": 8},
  "exponents": {"p": 2.5},
  "integrand": {"kind": "coordinate"},
  "checks": ["chen"]
}"#;

const WALK: &str = r#"{
  "schema_version": 1,
  "path": {"kind": "random_walk", "seed": 7, "params": {"n_steps": 4096, "T": 1, "d": 1, "scale": 0.000244140625}},
  "ladder": {"rule": "dyadic", "from": 2, "to": 10},
  "exponents": {"p": 2.5},
  "integrand": {"kind": "phi", "name": "sin"},
  "checks": ["rie", "follmer", "hoeffding"]
}"#;

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let file = dir.join("config.json");
    fs::write(&file, text).unwrap();
    file
}

fn pathwise(args: &[&str], env_out: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_pathwise"));
    cmd.args(args).env_remove("PATHWISE_OUT");
    if let Some(dir) = env_out {
        cmd.env("PATHWISE_OUT", dir);
    }
    cmd.output().unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn linear_path_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), LINEAR);
    let out = dir.path().join("out");
    let o = pathwise(&["study", "--config", s(&cfg), "--out", s(&out)], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sum = summary(&out);
    assert_eq!(sum["schema_version"], 1);
    assert!(sum["chen_residual_max"].as_f64().unwrap() < 1e-12);
    // one crossing per threshold on a unit-slope line: finest QV = 2^-8
    let qv = sum["qv_limit"].as_f64().unwrap();
    assert!((qv - 2f64.powi(-8)).abs() < 1e-15);
    assert_eq!(sum["checks"]["chen"]["verdict"], "pass");
    let qv_csv = fs::read_to_string(out.join("qv.csv")).unwrap();
    assert!(qv_csv.starts_with("level,threshold,i,j,t,value\n"));
    let curves = fs::read_to_string(out.join("compensated.csv")).unwrap();
    assert!(curves.starts_with("level,t,value\n"));
    // 17 significant digits
    let first = curves.lines().nth(2).unwrap().split(',').nth(1).unwrap();
    assert_eq!(first.split('e').next().unwrap().replace(['.', '-'], "").len(), 17);
}

#[test]
fn walk_checks_pass() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), WALK);
    let out = dir.path().join("out");
    let o = pathwise(&["verify", "--config", s(&cfg), "--out", s(&out)], None);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sum = summary(&out);
    for check in ["rie", "follmer", "hoeffding"] {
        assert_eq!(sum["checks"][check]["verdict"], "pass", "{check}");
    }
    assert_eq!(sum["all_pass"], true);
    for f in ["rie.json", "follmer.json", "hoeffding.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
}

#[test]
fn invalid_exponent_exits_with_error_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &LINEAR.replace("\"p\": 2.5", "\"p\": 3.5"));
    let out = dir.path().join("out");
    let o = pathwise(&["study", "--config", s(&cfg), "--out", s(&out)], None);
    assert_eq!(o.status.code(), Some(2));
    let err: Value = serde_json::from_str(String::from_utf8_lossy(&o.stderr).trim()).unwrap();
    assert_eq!(err["error"]["code"], "exponent_out_of_range");
    assert!(!out.exists());
}

#[test]
fn failed_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let text = LINEAR
        .replace("\"checks\": [\"chen\"]", "\"checks\": [\"isometry\"], \"isometry\": {\"a\": 1e-6}");
    let cfg = write_config(dir.path(), &text);
    let out = dir.path().join("out");
    let o = pathwise(&["verify", "--config", s(&cfg), "--out", s(&out)], None);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(summary(&out)["checks"]["isometry"]["verdict"], "not_applicable");
}

#[test]
fn outputs_are_bit_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), WALK);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = pathwise(&["study", "--config", s(&cfg), "--out", s(out)], None);
        assert!(o.status.success());
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() >= 10);
    for name in names {
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap(), "{name:?}");
    }
}

#[test]
fn seed_flag_and_env_output_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), WALK);
    let env_out = dir.path().join("env");
    let o = pathwise(&["generate", "--config", s(&cfg)], Some(&env_out));
    assert!(o.status.success());
    assert_eq!(summary(&env_out)["path"]["seed"], 7);
    let seeded = dir.path().join("seeded");
    let o = pathwise(&["generate", "--config", s(&cfg), "--seed", "8", "--out", s(&seeded)], Some(&env_out));
    assert!(o.status.success());
    assert_eq!(summary(&seeded)["path"]["seed"], 8);
    assert_ne!(fs::read(env_out.join("path.csv")).unwrap(), fs::read(seeded.join("path.csv")).unwrap());
}

#[test]
fn csv_path_input_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), WALK);
    let first = dir.path().join("first");
    assert!(pathwise(&["generate", "--config", s(&cfg), "--out", s(&first)], None).status.success());
    let text = WALK.replace(
        r#"{"kind": "random_walk", "seed": 7, "params": {"n_steps": 4096, "T": 1, "d": 1, "scale": 0.000244140625}}"#,
        r#"{"csv": "first/path.csv"}"#,
    );
    let cfg = write_config(dir.path(), &text);
    let second = dir.path().join("second");
    assert!(pathwise(&["verify", "--config", s(&cfg), "--out", s(&second)], None).status.success());
    assert_eq!(fs::read(first.join("ladder.json")).unwrap(), fs::read(second.join("ladder.json")).unwrap());
    assert_eq!(summary(&second)["all_pass"], true);
}
