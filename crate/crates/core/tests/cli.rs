use std::path::Path;
use std::process::{Command, Output};

use boundstate::{eval_bubble, validate_config, BubbleParams};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_boundstate"))
        .args(args)
        .env_remove("BV_THREADS")
        .output()
        .expect("spawn boundstate")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn unknown_flag_exits_one() {
    let out = bin(&["shoot", "--u0", "1", "--v0", "1", "--nonsense"]);
    assert_eq!(code(&out), 1);
    assert!(!out.stderr.is_empty());
}

#[test]
fn nonpositive_data_exits_one() {
    assert_eq!(code(&bin(&["shoot", "--u0", "0", "--v0", "1"])), 1);
}

#[test]
fn picard_blowup_is_numerical() {
    let out = bin(&["picard", "--perturb", "0.01", "--max-steps", "50"]);
    assert_eq!(code(&out), 3);
    let lines = String::from_utf8(out.stdout).unwrap();
    let first: serde_json::Value = serde_json::from_str(lines.lines().next().unwrap()).unwrap();
    assert_eq!(first["step"], 1);
}

#[test]
fn shoot_profile_follows_the_bubble() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("profile.csv");
    let out = bin(&["shoot", "--u0", "1", "--v0", "1", "--out", csv.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["kind"], "BoundState");

    let config = validate_config(3, 2.0, 3.0).unwrap();
    // u(0) = 1 fixes t = sqrt(3)
    let b = BubbleParams::centered(&config, 3f64.sqrt()).unwrap();
    let mut reader = csv::Reader::from_path(&csv).unwrap();
    let mut checked = 0;
    for rec in reader.records() {
        let rec = rec.unwrap();
        let r: f64 = rec[0].parse().unwrap();
        let u: f64 = rec[1].parse().unwrap();
        let v: f64 = rec[2].parse().unwrap();
        if r > 50.0 {
            break;
        }
        let phi = eval_bubble(&b, &[r, 0.0, 0.0]);
        assert!((u - phi).abs() <= 1e-6 * phi, "r = {r}: {u} vs {phi}");
        assert_eq!(u, v);
        checked += 1;
    }
    assert!(checked > 1000);
}

fn manifest(out: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(boundstate::cli::RunManifest::path_for(out)).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn reruns_reproduce_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        let out = bin(&["--seed", "7", "sweep", "--ratios", "0.5,1,2", "--out", p.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let (ma, mb) = (manifest(&a), manifest(&b));
    assert_eq!(ma["parameters"], mb["parameters"]);
    assert_eq!(ma["seed"], 7);
    assert_eq!(ma["subcommand"], "sweep");
    assert_eq!(ma["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn config_file_changes_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("n4.json");
    std::fs::write(&cfg, r#"{"n": 4, "alpha": 1.5, "beta": 1.5}"#).unwrap();
    let out = bin(&["--config", cfg.to_str().unwrap(), "bubble", "residual"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["residual"].as_f64().unwrap() < 1e-6);

    std::fs::write(&cfg, r#"{"n": 3, "alpha": 2.0, "beta": 2.0}"#).unwrap();
    assert_eq!(code(&bin(&["--config", cfg.to_str().unwrap(), "bubble", "residual"])), 1);
}

#[test]
fn moving_plane_scan_finds_the_centre() {
    let out = bin(&["mp", "scan", "--center", "1,0,0", "--lambdas", "-2,-1,0,0.5,1,1.5,2"]);
    assert_eq!(code(&out), 0);
    let scan: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(scan["lambda0"], 1.0);
}

#[test]
fn verify_all_subset_passes() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("verify.json");
    let out = bin(&["--threads", "2", "verify-all", "--only", "1,3,7", "--out", report.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["passed"], true);
    assert_eq!(v["reports"].as_array().unwrap().len(), 3);
}
