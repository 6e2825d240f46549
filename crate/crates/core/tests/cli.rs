use std::fs;
use std::path::Path;
use std::process::Command;

use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_levy-mckean"));
    c.env_remove("LEVY_MCKEAN_OUT");
    c
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

const TINY_POC: &str = r#"
kind = "poc"
seed = 3

[model]
kind = "compound-poisson"
atoms = [{ jump = [1.0], rate = 1.0 }, { jump = [-1.0], rate = 1.0 }]

[coefficients]
kind = "tanh-mean-field"
a = -0.5
kappa = 1.0

[initial]
law = "gaussian"
mean = [1.0]
sd = 0.5

[plan]
n_grid = [4, 8, 16, 32]
replications = 50
horizon = 0.5
steps = 5
"#;

#[test]
fn nonuniqueness_run_writes_hashed_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "n.toml", "kind = \"nonuniqueness\"\nseed = 1\n[nonuniqueness]\nbeta = 0.5\n");
    let out = tmp.path().join("out");
    let status = bin().arg("run").arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    let files = manifest["files"].as_array().unwrap();
    assert!(files.iter().any(|f| f["path"] == "trajectories.csv"));
    for f in files {
        let bytes = fs::read(out.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    assert!(manifest["build"].as_str().is_some_and(|b| !b.is_empty()));
    assert!(manifest["elapsed_seconds"].as_f64().is_some());
    assert_eq!(manifest["config"]["experiment"]["steps"], 1000);
}

#[test]
fn invalid_config_exits_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "bad.toml", &TINY_POC.replace("seed = 3", "").replace("steps = 5", "step = 5"));
    let out = bin().arg("run").arg(&cfg).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("missing key `seed`"), "{err}");
    assert!(err.contains("unknown key `plan.step`"), "{err}");
}

#[test]
fn blow_ups_exit_with_their_own_code() {
    let tmp = tempfile::tempdir().unwrap();
    let text = TINY_POC.replace(
        "kind = \"tanh-mean-field\"\na = -0.5\nkappa = 1.0",
        "kind = \"stable-ou\"\na = [1e300]\na_prime = [1.0]",
    );
    let cfg = write(tmp.path(), "blow.toml", &text);
    let status = bin().arg("run").arg(&cfg).arg("--out").arg(tmp.path().join("o")).status().unwrap();
    assert_eq!(status.code(), Some(3));
}

#[test]
fn missed_threshold_exits_with_acceptance_code() {
    let tmp = tempfile::tempdir().unwrap();
    let text = TINY_POC.replace("steps = 5", "steps = 5\ntolerance = 0.0");
    let cfg = write(tmp.path(), "strict.toml", &text);
    let status = bin().arg("run").arg(&cfg).arg("--out").arg(tmp.path().join("o")).status().unwrap();
    assert_eq!(status.code(), Some(4));
}

#[test]
fn environment_overrides_configured_output() {
    let tmp = tempfile::tempdir().unwrap();
    let target = tmp.path().join("from-env");
    let text = format!(
        "kind = \"nonuniqueness\"\nseed = 1\noutput = \"{}\"\n[nonuniqueness]\nbeta = 0.5\n",
        tmp.path().join("from-config").display()
    );
    let cfg = write(tmp.path(), "n.toml", &text);
    let status = bin()
        .env("LEVY_MCKEAN_OUT", &target)
        .arg("run")
        .arg(&cfg)
        .arg("--threads")
        .arg("1")
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(target.join("manifest.json").exists());
    assert!(!tmp.path().join("from-config").exists());
}

#[test]
fn identical_runs_give_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "p.toml", TINY_POC);
    for (name, threads) in [("a", "1"), ("b", "2")] {
        let status = bin()
            .arg("run")
            .arg(&cfg)
            .arg("--out")
            .arg(tmp.path().join(name))
            .arg("--threads")
            .arg(threads)
            .status()
            .unwrap();
        assert!(matches!(status.code(), Some(0) | Some(4)));
    }
    let a = fs::read(tmp.path().join("a/rate.csv")).unwrap();
    let b = fs::read(tmp.path().join("b/rate.csv")).unwrap();
    assert_eq!(a, b);
    assert!(String::from_utf8(a).unwrap().starts_with("N,E1,E1_se,E2,E2_se\n"));
}

#[test]
fn noise_validate_reports_every_check() {
    let tmp = tempfile::tempdir().unwrap();
    let text = "kind = \"noise-validate\"\nseed = 2024\n[model]\nkind = \"compound-poisson\"\natoms = [{ jump = [1.0], rate = 2.0 }, { jump = [-2.0], rate = 1.0 }]\n[noise]\npaths = 2000\n";
    let cfg = write(tmp.path(), "v.toml", text);
    let out = tmp.path().join("o");
    let status = bin().arg("run").arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = fs::read_to_string(out.join("validation.csv")).unwrap();
    assert!(csv.lines().next().unwrap().starts_with("check,statistic,p_value"));
    assert!(csv.contains("poisson_count_chi2"));
}
