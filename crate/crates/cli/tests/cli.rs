use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn subh(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subh"))
        .args(args)
        .env_remove("SUBH_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

#[test]
fn curves_writes_one_row_per_eps() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curves.csv");
    let cfg = config("sys_a.toml");
    let o = subh(&[
        "curves", "--config", cfg.to_str().unwrap(), "--p", "1", "--q", "1", "--order", "4",
        "--eps", "log:1e-3:1e-1:25", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_csv(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(header, ["eps", "gamma1", "gamma2", "tau1", "tau2"]);
    assert_eq!(rows.len(), 25);
    for r in &rows {
        assert!((r[1] - r[0]).abs() < 1e-15 && (r[2] + r[0]).abs() < 1e-15);
    }
}

#[test]
fn two_sided_grid_mirrors() {
    let cfg = config("sys_a_prime.toml");
    let o = subh(&["curves", "--config", cfg.to_str().unwrap(), "--order", "2", "--eps", "lin:0.01:0.05:3", "--two-sided"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, rows) = read_csv(&stdout(&o));
    assert_eq!(rows.len(), 6);
    assert!(rows[0][0] == -0.05 && rows[5][0] == 0.05);
    assert!(rows[0][1] < rows[0][2]);
}

#[test]
fn isochronous_violates_first_hypothesis() {
    let cfg = config("isochronous.toml");
    let o = subh(&["melnikov", "--config", cfg.to_str().unwrap(), "--p", "1", "--q", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Hypothesis 1 violated"));
    assert!(o.stdout.is_empty());
}

#[test]
fn count_prints_the_number_of_solutions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("count.json");
    let cfg = config("sys_a.toml");
    let o = subh(&["count", "--config", cfg.to_str().unwrap(), "--eps", "0.05", "--gamma", "0.0", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "2");
    let detail: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(detail["roots"].as_array().unwrap().len(), 2);

    let cfg3 = config("sys_a3.toml");
    let o = subh(&["count", "--config", cfg3.to_str().unwrap(), "--q", "3", "--eps", "0.05", "--gamma", "0.0"]);
    assert_eq!(stdout(&o).trim(), "6", "{}", stderr(&o));

    let o = subh(&["count", "--config", cfg.to_str().unwrap(), "--eps", "0.05", "--gamma", "0.2"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn melnikov_csv_round_trips() {
    let cfg = config("sys_a.toml");
    let o = subh(&["melnikov", "--config", cfg.to_str().unwrap(), "--t0-grid", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let (header, rows) = read_csv(&stdout(&o));
    assert_eq!(header, ["t0", "C0", "D"]);
    assert_eq!(rows.len(), 16);
    for r in rows {
        assert!((r[1] + r[0].sin()).abs() < 1e-15 && r[2] == -1.0);
    }
}

#[test]
fn mechanical_melnikov_has_zero_mean() {
    let cfg = config("cubic.toml");
    let o = subh(&["melnikov", "--config", cfg.to_str().unwrap(), "--mechanical", "--t0-grid", "32"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (_, rows) = read_csv(&stdout(&o));
    let mean = rows.iter().map(|r| r[1]).sum::<f64>() / rows.len() as f64;
    assert!(mean.abs() < 1e-10);
    assert!(rows.iter().all(|r| r[2] < 0.0));
}

#[test]
fn series_json_schema() {
    let cfg = config("sys_a_prime.toml");
    let o = subh(&["series", "--config", cfg.to_str().unwrap(), "--t0", "0.5", "--order", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["mode"], "c");
    let c = doc["C"].as_array().unwrap();
    assert_eq!(c.len(), 3);
    assert!((c[0].as_f64().unwrap() + 0.5f64.sin()).abs() < 1e-15);
    let first = &doc["orders"][0];
    assert_eq!(first["k"], 1);
    let a1: Vec<f64> = first["A"]
        .as_array()
        .unwrap()
        .iter()
        .find(|t| t[0] == 1)
        .map(|t| vec![t[1].as_f64().unwrap(), t[2].as_f64().unwrap()])
        .unwrap();
    // A₁ at ν = 1 is -(i/2) e^{i t₀}
    assert!((a1[0] - 0.5 * 0.5f64.sin()).abs() < 1e-15 && (a1[1] + 0.5 * 0.5f64.cos()).abs() < 1e-15);

    let o = subh(&["series", "--config", cfg.to_str().unwrap(), "--t0", "-0.3", "--mode", "fixed", "--c-fixed", "0.3", "--order", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["mode"], "fixed");
    assert!(doc.get("C").is_none());
    assert_eq!(doc["alpha_bar"].as_array().unwrap().len(), 3);
    assert!((doc["t0"].as_f64().unwrap() - (-0.3f64).asin()).abs() < 1e-14);

    let o = subh(&["series", "--config", cfg.to_str().unwrap(), "--t0", "0.3", "--mode", "fixed"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn trees_check_agrees() {
    let cfg = config("sys_a_prime.toml");
    let o = subh(&["trees", "--config", cfg.to_str().unwrap(), "--check", "--order", "3", "--t0", "1.3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let mut r = csv::Reader::from_reader(o.stdout.as_slice());
    assert_eq!(
        r.headers().unwrap().iter().collect::<Vec<_>>(),
        ["k", "h", "nu", "tree_re", "tree_im", "series_re", "series_im", "abs_diff"]
    );
    let rows: Vec<csv::StringRecord> = r.records().map(Result::unwrap).collect();
    assert!(!rows.is_empty());
    for row in rows {
        assert!(row[7].parse::<f64>().unwrap() < 1e-12);
    }

    let o = subh(&["trees", "--config", cfg.to_str().unwrap(), "--order", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("k,h,nu,trees\n"));
}

#[test]
fn verify_inside_and_outside() {
    let cfg = config("sys_a_prime.toml");
    let o = subh(&["verify", "--config", cfg.to_str().unwrap(), "--eps", "0.05", "--C", "0.3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["converged"], true);
    assert!(doc["defect"].as_f64().unwrap() <= 1e-10);
    assert_eq!(doc["orbit_ic"].as_array().unwrap().len(), 2);

    let o = subh(&["verify", "--config", cfg.to_str().unwrap(), "--eps", "0.05", "--C", "1.5", "--threads", "2"]);
    assert_eq!(o.status.code(), Some(3));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["converged"], false);
}

#[test]
fn verify_mechanical() {
    let cfg = config("cubic.toml");
    let o = subh(&["verify", "--config", cfg.to_str().unwrap(), "--mechanical", "--eps", "0.01", "--C", "0.2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["converged"], true);
}

#[test]
fn scan_brackets_the_existence_interval() {
    let cfg = config("sys_a.toml");
    let o = subh(&["scan", "--config", cfg.to_str().unwrap(), "--eps", "0.05", "--bracket", "-2:2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let (header, rows) = read_csv(&stdout(&o));
    assert_eq!(header, ["eps", "C_max_hat", "C_min_hat"]);
    assert!((rows[0][1] - 1.0).abs() < 1e-6 && (rows[0][2] + 1.0).abs() < 1e-6, "{rows:?}");
}

#[test]
fn outputs_are_deterministic() {
    let cfg = config("sys_a_prime.toml");
    let args = ["curves", "--config", cfg.to_str().unwrap(), "--eps", "log:1e-3:1e-1:7"];
    let a = subh(&args);
    let b = Command::new(env!("CARGO_BIN_EXE_subh")).args(args).env("SUBH_THREADS", "1").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn usage_errors_exit_four() {
    let cfg = config("sys_a.toml");
    assert_eq!(subh(&["curves", "--config", cfg.to_str().unwrap(), "--eps", "log:0:1:3"]).status.code(), Some(4));
    assert_eq!(subh(&["curves", "--config", cfg.to_str().unwrap(), "--bogus"]).status.code(), Some(4));
    assert_eq!(subh(&["melnikov", "--config", "/nonexistent.toml"]).status.code(), Some(4));
    assert_eq!(subh(&["melnikov", "--config", cfg.to_str().unwrap(), "--p", "2", "--q", "4"]).status.code(), Some(4));
    assert_eq!(subh(&["count", "--config", cfg.to_str().unwrap(), "--mechanical", "--eps", "0.1", "--gamma", "0"]).status.code(), Some(4));
    let cubic = config("cubic.toml");
    assert_eq!(subh(&["melnikov", "--config", cubic.to_str().unwrap()]).status.code(), Some(4));
    assert_eq!(subh(&["--help"]).status.code(), Some(0));
}
