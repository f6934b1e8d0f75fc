use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sibuya-lab")).args(args).env_remove("SIBUYA_LAB_CONFIG").output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn csv_column(text: &str, col: usize) -> Vec<f64> {
    text.lines().skip(1).map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

#[test]
fn sibuya_pmf_csv() {
    let out = stdout(&lab(&["pmf", "sibuya", "--gamma", "0.5", "--n-max", "3"]));
    assert!(out.starts_with("n,p\n"));
    let p = csv_column(&out, 1);
    for (got, want) in p.iter().zip([0.0, 0.5, 0.125, 0.0625]) {
        assert!((got - want).abs() < 1e-14, "{got} vs {want}");
    }
}

#[test]
fn pmf_json_round_trips() {
    let v = json(&lab(&["pmf", "nbd", "--q", "0.5", "--k", "2", "--n-max", "10", "--format", "json"]));
    assert_eq!(v["schema_version"], 1);
    assert!((v["table"]["probs"][0].as_f64().unwrap() - 0.25).abs() < 1e-15);
}

#[test]
fn moment_finite_example() {
    let v = json(&lab(&["moment-finite", "sibuya", "--gamma", "0.6", "--r", "0.8"]));
    assert_eq!(v["finite"], false);
    assert_eq!(v["schema_version"], 1);
}

#[test]
fn thinning_poisson_up() {
    let out = stdout(&lab(&["thin", "poisson", "--lambda", "2", "--a", "3", "--n-max", "15"]));
    let mut want = (-6.0f64).exp();
    for (n, p) in csv_column(&out, 1).iter().enumerate() {
        assert!((p - want).abs() < 1e-12, "n={n}");
        want *= 6.0 / (n + 1) as f64;
    }
}

#[test]
fn exit_codes() {
    assert_eq!(lab(&["thin", "sibuya", "--gamma", "0.5", "--a", "3"]).status.code(), Some(2));
    let o = lab(&["pmf", "sibuya", "--gamma", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("0 < gamma < 1"));
    assert_eq!(lab(&["pmf", "no_such_family"]).status.code(), Some(1));
}

#[test]
fn bd_solve_and_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("model.json");
    std::fs::write(&path, r#"{"alpha":[1,0.5],"beta":[1]}"#).unwrap();
    let p = path.to_str().unwrap();
    let out = stdout(&lab(&["bd", "solve", "--model", p, "--n-max", "5"]));
    assert!((csv_column(&out, 1)[0] - 0.25).abs() < 1e-14);

    let args = ["bd", "simulate", "--model", p, "--t-end", "20000", "--seed", "9", "--format", "json"];
    let a = json(&lab(&args));
    assert!(a["tv_distance"].as_f64().unwrap() < 0.05);
    assert_eq!(a, json(&lab(&args)), "same seed, same output");

    let csv = stdout(&lab(&["bd", "simulate", "--model", p, "--t-end", "1000", "--seed", "1"]));
    assert!(csv.starts_with("state,occupancy,probability\n"));
}

#[test]
fn progeny_report() {
    let v = json(&lab(&["progeny", "--b", "0.9", "--gamma", "0.6", "--n-max", "10"]));
    assert_eq!(v["sign_diagnosis"]["is_progeny_evidence"], true);
    assert_eq!(v["criticality"], "subcritical");
    let v = json(&lab(&["progeny", "--b", "0.8", "--gamma", "-1.5"]));
    assert_eq!(v["sign_diagnosis"]["first_negative"], 2);
    assert_eq!(lab(&["progeny", "--b", "0.8", "--gamma", "-1.5", "--simulate"]).status.code(), Some(2));
}

#[test]
fn check_sd_methods() {
    let v = json(&lab(&["check-sd", "shifted_extended_sibuya", "--b", "0.9", "--gamma", "0.5", "--j-max", "100"]));
    assert_eq!(v["report"]["holds_up_to"], 100);
    let v = json(&lab(&["check-sd", "nbd", "--q", "0.5", "--k", "1", "--method", "residual", "--a", "0.5", "--j-max", "40"]));
    assert_eq!(v["nonnegative"], true);
}

#[test]
fn sample_is_seeded() {
    let a = stdout(&lab(&["sample", "sibuya", "--gamma", "0.5", "-n", "1000", "--seed", "4"]));
    assert_eq!(a, stdout(&lab(&["sample", "sibuya", "--gamma", "0.5", "-n", "1000", "--seed", "4"])));
    assert_eq!(a.lines().count(), 1000);
    assert!(a.lines().all(|l| l.parse::<u64>().unwrap() >= 1));
}

#[test]
fn config_defaults_and_precedence() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    write!(f, r#"{{"n_max": 2, "format": "json"}}"#).unwrap();
    let run = |extra: &[&str]| {
        let mut args = vec!["pmf", "sibuya", "--gamma", "0.5"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_sibuya-lab")).args(&args).env("SIBUYA_LAB_CONFIG", f.path()).output().unwrap()
    };
    let v = json(&run(&[]));
    assert_eq!(v["table"]["probs"].as_array().unwrap().len(), 3);
    let out = stdout(&run(&["--n-max", "4", "--format", "csv"]));
    assert_eq!(out.lines().count(), 6);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    write!(bad, "{{not json").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_sibuya-lab"))
        .args(["pmf", "sibuya", "--gamma", "0.5"])
        .env("SIBUYA_LAB_CONFIG", bad.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn pgf_eval_grid() {
    let v = json(&lab(&["pgf-eval", "nbd", "--q", "0.5", "--k", "2", "--w", "0,0.5,1", "--format", "json"]));
    let vals: Vec<f64> = v["values"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    for (w, got) in [0.0f64, 0.5, 1.0].iter().zip(vals) {
        let want = (0.5 / (1.0 - 0.5 * w)).powi(2);
        assert!((got - want).abs() < 1e-14);
    }
}
