use std::path::Path;
use std::process::{Command, Output};

use mlfc_core::suite::gating_cases;
use serde_json::Value;

fn mlfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlfc"))
        .args(args)
        .env_remove("MLFC_CONFIG")
        .output()
        .expect("run mlfc")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

#[test]
fn quadratic_phase_with_first_derivative_is_refused() {
    let o = mlfc(&["decay", "verify", "--theorem", "T33", "--alpha", "1", "--beta", "1", "--k", "1", "--phase", "quadratic:c=0", "--domain", "0,1"]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    assert!(String::from_utf8_lossy(&o.stderr).contains("T33"));
}

#[test]
fn gating_cases_exit_with_hypothesis_code() {
    for (name, spec, id, k) in gating_cases() {
        let (a, b) = (spec.params.alpha().to_string(), spec.params.beta().to_string());
        let (phase, amp, domain) = (spec.phase.to_string(), spec.amplitude.to_string(), spec.domain.to_string());
        let id = id.to_string();
        let k = k.to_string();
        let o = mlfc(&[
            "decay", "verify", "--theorem", &id, "--alpha", &a, "--beta", &b, "--k", &k, "--phase", &phase, "--amp", &amp, "--domain", &domain,
        ]);
        assert_eq!(code(&o), 2, "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn eval_prints_e() {
    let o = mlfc(&["mlf", "eval", "--alpha", "1", "--beta", "1", "--z", "1,0"]);
    assert_eq!(code(&o), 0);
    let f: Vec<f64> = String::from_utf8(o.stdout).unwrap().split_whitespace().map(|s| s.parse().unwrap()).collect();
    assert!((f[0] - std::f64::consts::E).abs() <= 2.0 * f64::EPSILON * std::f64::consts::E);
    assert_eq!(f[1], 0.0);
    assert_eq!(f[3], 0.0);

    let o = mlfc(&["mlf", "eval", "--alpha", "1", "--beta", "1", "--z", "1", "--oracle-digits", "50"]);
    let s = String::from_utf8(o.stdout).unwrap();
    assert_eq!(s.split_whitespace().next().unwrap().parse::<f64>().unwrap(), std::f64::consts::E);
}

#[test]
fn usage_errors() {
    for args in [
        &["mlf", "eval", "--alpha", "1", "--beta", "1"][..],
        &["mlf", "eval", "--alpha", "0", "--beta", "1", "--z", "1"],
        &["oscint", "--alpha", "1", "--beta", "1", "--lambda", "10", "--phase", "cubic", "--domain", "0,1"],
        &["decay", "verify", "--bogus", "1"],
        &["pde", "kg", "--alpha", "0.5", "--mu", "1", "--t", "1"],
        &[],
    ] {
        assert_eq!(code(&mlfc(args)), 1, "{args:?}");
    }
}

#[test]
fn failed_verdict_exits_four() {
    // a ratio cap far below the observed constant
    let o = mlfc(&[
        "decay", "verify", "--theorem", "T33", "--alpha", "1", "--beta", "1", "--k", "2", "--phase", "quadratic:c=0", "--domain", "0,1", "--ratio-cap", "1e-3",
    ]);
    assert_eq!(code(&o), 4);
    assert_eq!(json(&o)["pass"], Value::Bool(false));
}

#[test]
fn config_round_trip_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["oscint", "--alpha", "0.8", "--beta", "0.8", "--lambda", "50", "--phase", "quadratic:c=0", "--domain", "0,1"];
    let first = mlfc(&args);
    assert_eq!(code(&first), 0);
    let doc = json(&first);
    assert_eq!(doc["kind"], "integral");
    let text: String = doc["config"]
        .as_object()
        .unwrap()
        .iter()
        .map(|(k, v)| format!("{k} = {}\n", v.as_str().unwrap()))
        .collect();
    let path = dir.path().join("run.cfg");
    std::fs::write(&path, text).unwrap();
    let second = mlfc(&["--config", path.to_str().unwrap()]);
    assert_eq!(code(&second), 0, "{}", String::from_utf8_lossy(&second.stderr));
    assert_eq!(first.stdout, second.stdout);

    // flags override the file; a different command is refused
    let third = mlfc(&["oscint", "--config", path.to_str().unwrap(), "--lambda", "60"]);
    assert_eq!(json(&third)["config"]["lambda"], "60");
    assert_eq!(code(&mlfc(&["rl", "--config", path.to_str().unwrap()])), 1);
}

#[test]
fn environment_config_has_lowest_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let env = dir.path().join("env.cfg");
    std::fs::write(&env, "alpha = 1\nbeta = 1\nz = 2\n").unwrap();
    let file = dir.path().join("file.cfg");
    std::fs::write(&file, "command = mlf eval\nz = 1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_mlfc"))
        .args(["--config", file.to_str().unwrap()])
        .env("MLFC_CONFIG", &env)
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let re: f64 = String::from_utf8(o.stdout).unwrap().split_whitespace().next().unwrap().parse().unwrap();
    assert!((re - std::f64::consts::E).abs() < 1e-14);
}

#[test]
fn thread_count_does_not_change_numerics() {
    let base = ["pde", "kg", "--alpha", "1.5", "--mu", "1", "--t", "3", "--xgrid", "-5:5:101"];
    let run = |t: &str| {
        let mut a = base.to_vec();
        a.extend(["--threads", t]);
        let mut v = json(&mlfc(&a));
        v.as_object_mut().unwrap().remove("config");
        v
    };
    assert_eq!(run("1"), run("2"));
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(|s| s.parse().unwrap()).collect()).collect();
    (header, rows)
}

#[test]
fn csv_and_svg_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("d.csv");
    let svg = dir.path().join("d.svg");
    let o = mlfc(&[
        "decay", "verify", "--theorem", "T33", "--alpha", "1", "--beta", "1", "--k", "2", "--phase", "quadratic:c=0", "--domain", "0,1",
        "--csv", csv.to_str().unwrap(), "--svg", svg.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let (h, rows) = read_csv(&csv);
    assert_eq!(h, ["lambda", "abs_I", "ratio"]);
    assert_eq!(rows.len(), 16);
    let doc = json(&o);
    // serde_json's default float parser may be one ulp off
    let close = |a: f64, b: f64| (a - b).abs() <= 4.0 * f64::EPSILON * a.abs();
    for (row, s) in rows.iter().zip(doc["samples"].as_array().unwrap()) {
        assert!(close(row[0], s["lambda"].as_f64().unwrap()));
        assert!(close(row[1], s["abs_i"].as_f64().unwrap()));
    }
    assert!(std::fs::read_to_string(&svg).unwrap().contains(r#"class="reference""#));

    let field = dir.path().join("u.csv");
    let o = mlfc(&["pde", "schrodinger", "--alpha", "0.8", "--gamma", "0.3", "--mu", "1", "--t", "1", "--xgrid", "-2:2:9", "--csv", field.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = read_csv(&field);
    assert_eq!(h, ["x", "re", "im", "abs"]);
    assert_eq!(rows.len(), 9);
    for r in &rows {
        assert!((r[1].hypot(r[2]) - r[3]).abs() <= 1e-15 * r[3].max(1e-300));
    }

    let disp = dir.path().join("t.csv");
    let o = mlfc(&["pde", "decay", "--model", "kg", "--alpha", "2", "--mu", "1", "--tgrid", "1:10:4", "--csv", disp.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let (h, rows) = read_csv(&disp);
    assert_eq!(h, ["t", "sup_norm", "envelope", "ratio"]);
    assert_eq!(rows.len(), 4);
}
