use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TOY: &str = "x1,x2,x3\n1,2,0\n2,0,1\n0,1,3\n4,3,2\n";

fn elasso(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_elasso"))
        .args(args)
        .env_remove("ELASSO_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &TempDir, name: &str, contents: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, contents).unwrap();
    p
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn path_on_toy_data() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "toy.csv", TOY);
    let curve = dir.path().join("curve.csv");
    let v = json(&elasso(&["path", "--input", s(&input), "--curve", s(&curve)]));
    let partitions = v["partitions"].as_array().unwrap();
    assert_eq!(partitions.len(), 3);
    for p in partitions {
        assert_eq!(p.as_array().unwrap().iter().map(|x| x.as_u64().unwrap()).sum::<u64>(), 3);
    }
    let knots = floats(&v["knots"]);
    assert_eq!(knots.len(), 2);
    assert!(knots.iter().all(|k| k.is_finite()) && knots[0] <= knots[1]);
    let text = fs::read_to_string(curve).unwrap();
    assert!(text.starts_with("eta,index,lambda\n"));
    assert_eq!(text.lines().count(), 1 + 3 * 3);
}

#[test]
fn fit_at_zero_is_sample_covariance() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "toy.csv", TOY);
    let path = json(&elasso(&["path", "--input", s(&input)]));
    let fit = json(&elasso(&["fit", "--input", s(&input), "--eta", "0"]));
    assert_eq!(floats(&fit["eigenvalues"]), floats(&path["eigenvalues"]));
}

#[test]
fn kappa_and_matched_eta_agree() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "toy.csv", TOY);
    let by_kappa = json(&elasso(&["fit", "--input", s(&input), "--kappa", "0.05"]));
    let eta = by_kappa["eta"].as_f64().unwrap();
    assert!(eta > 0.0);
    let by_eta = json(&elasso(&["fit", "--input", s(&input), "--eta", &eta.to_string()]));
    assert_eq!(by_kappa["eigenvalues"], by_eta["eigenvalues"]);
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let data = elasso(&["simulate", "sample", "--sizes", "2,3", "--values", "4,1", "--n", "60", "--seed", "5"]);
    assert!(data.status.success());
    let input = write(&dir, "sim.csv", &String::from_utf8(data.stdout).unwrap());
    let args = ["cv", "--input", s(&input), "--seed", "3", "--kfold", "5", "--grid", "0:2:11"];
    let first = elasso(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    assert_eq!(first.stdout, elasso(&args).stdout);
    let v: Value = serde_json::from_slice(&first.stdout).unwrap();
    assert_eq!(v["fold_scores"].as_array().unwrap().len(), 5);
    assert!(v["eta_1se"].as_f64().unwrap() >= v["eta_min"].as_f64().unwrap());

    let mcv = json(&elasso(&[
        "model-cv", "--input", s(&input), "--seed", "3", "--kfold", "5", "--grid", "0:2:11", "--mode", "approximate",
    ]));
    assert_eq!(mcv["models"].as_array().unwrap().iter().filter(|m| m["selected"] == true).count(), 1);
}

#[test]
fn predict_writes_component_errors() {
    let dir = TempDir::new().unwrap();
    let data = elasso(&["simulate", "sample", "--sizes", "1,3", "--values", "5,1", "--n", "80", "--seed", "2"]);
    let input = write(&dir, "sim.csv", &String::from_utf8(data.stdout).unwrap());
    let out = elasso(&["predict", "--input", s(&input), "--train-rows", "1:60", "--head", "2", "--eta", "0.3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,aafe");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("1,"));
}

#[test]
fn simulation_reports() {
    let mse = json(&elasso(&["simulate", "mse", "--q", "3", "--n", "30", "--replicates", "50", "--seed", "1"]));
    assert_eq!(mse["target_ratio"].as_f64().unwrap(), 6.0);
    let knots = json(&elasso(&[
        "simulate", "knots", "--q", "8", "--n", "40", "--spikes", "5", "--replicates", "4", "--seed", "1",
    ]));
    assert_eq!(knots["top_knots"].as_array().unwrap().len(), 4);
    let cal = json(&elasso(&["calibrate", "--q", "4", "--n", "50", "--nsim", "200", "--seed", "1"]));
    assert!(cal["eta"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "toy.csv", TOY);
    let bad = elasso(&["path", "--input", s(&input), "--weights", "bogus"]);
    assert_eq!(bad.status.code(), Some(2));
    let stderr = String::from_utf8(bad.stderr).unwrap();
    assert_eq!(stderr.lines().count(), 1, "{stderr}");

    let singular = write(&dir, "flat.csv", "1,2,3\n2,4,6\n3,6,9\n4,8,12\n");
    let out = elasso(&["path", "--input", s(&singular)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stderr).unwrap().contains("SingularCovariance"));

    let missing = elasso(&["path", "--input", "/nonexistent/file.csv"]);
    assert_eq!(missing.status.code(), Some(2));

    let threads = Command::new(env!("CARGO_BIN_EXE_elasso"))
        .args(["path", "--input", s(&input)])
        .env("ELASSO_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(threads.status.code(), Some(2));
}

#[test]
fn covariance_input_and_weight_files() {
    let dir = TempDir::new().unwrap();
    let cov = write(&dir, "cov.csv", "4,1,0\n1,3,0\n0,0,1\n");
    let weights = write(&dir, "w.txt", "1\n0\n-1\n");
    let weights_arg = format!("file:{}", s(&weights));
    let v = json(&elasso(&[
        "path", "--input", s(&cov), "--covariance", "--samples", "50", "--weights", &weights_arg,
    ]));
    assert_eq!(floats(&v["weights"]), vec![1.0, 0.0, -1.0]);
    assert_eq!(v["merge_indices"].as_array().unwrap().len(), 2);
}
