use std::process::Command;

use serde_json::Value;

fn schema() -> jsonschema::JSONSchema {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../schemas/report.schema.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&v).expect("schema compiles")
}

fn report(args: &[&str]) -> Value {
    let o = Command::new(env!("CARGO_BIN_EXE_mlfc")).args(args).env_remove("MLFC_CONFIG").output().unwrap();
    assert!(o.status.code().is_some_and(|c| c == 0 || c == 4), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn assert_valid(s: &jsonschema::JSONSchema, v: &Value) {
    if let Err(errs) = s.validate(v) {
        let msgs: Vec<String> = errs.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{} report invalid: {msgs:#?}", v["kind"]);
    }
}

#[test]
fn every_report_kind_validates() {
    let s = schema();
    let runs: [&[&str]; 7] = [
        &["oscint", "--alpha", "1", "--beta", "1", "--lambda", "30", "--phase", "quadratic:c=0", "--amp", "gaussian:sigma=1", "--domain", "line"],
        &["oscint", "--alpha", "1", "--beta", "1", "--lambda", "30", "--phase", "quadratic:c=0", "--domain", "0,1"],
        &["decay", "verify", "--theorem", "T33", "--alpha", "1", "--beta", "1", "--k", "2", "--phase", "quadratic:c=0", "--domain", "0,1"],
        &["rl", "--alpha", "1.2", "--beta", "2.5"],
        &["pde", "kg", "--alpha", "1.5", "--mu", "1", "--t", "1", "--xgrid", "-3:3:31"],
        &["pde", "decay", "--model", "schrodinger", "--alpha", "1", "--gamma", "0.5", "--mu", "1", "--tgrid", "1:10:3"],
        &["suite", "acceptance", "--criteria", "8"],
    ];
    let mut kinds = Vec::new();
    for args in runs {
        let v = report(args);
        assert_valid(&s, &v);
        kinds.push(v["kind"].as_str().unwrap().to_string());
    }
    assert_eq!(kinds, ["integral", "integral", "bound", "bound", "field", "dispersive", "acceptance"]);
}

#[test]
fn schema_rejects_malformed_reports() {
    let s = schema();
    let mut v = report(&["pde", "kg", "--alpha", "2", "--mu", "1", "--t", "1", "--xgrid", "-1:1:3"]);
    assert_valid(&s, &v);
    v["config"]["alpha"] = Value::from(2.0);
    assert!(!s.is_valid(&v), "non-string config value accepted");
    v["config"]["alpha"] = Value::from("2");
    v.as_object_mut().unwrap().remove("sup_norm");
    assert!(!s.is_valid(&v));
    v["kind"] = Value::from("mystery");
    assert!(!s.is_valid(&v));
}
