//! The acceptance suite: all twelve criteria through the `mlfc` binary.
//! Run alone with `cargo test --release -p mlfc-core --test acceptance -- --nocapture`.

use std::process::Command;
use std::time::Instant;

use serde_json::Value;

#[test]
fn acceptance_suite() {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_mlfc"))
        .args(["suite", "acceptance", "--criteria", "all"])
        .env_remove("MLFC_CONFIG")
        .output()
        .expect("run mlfc");
    let wall = start.elapsed().as_secs_f64();
    let report: Value = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stderr)));

    let criteria = report["criteria"].as_array().expect("criteria");
    let mut failed = Vec::new();
    for c in criteria {
        let pass = c["pass"].as_bool().unwrap();
        println!(
            "[{}] criterion {:>2} {:<34} {:>7.1}s  {}",
            if pass { "PASS" } else { "FAIL" },
            c["id"],
            c["name"].as_str().unwrap(),
            c["seconds"].as_f64().unwrap_or(f64::NAN),
            c["detail"].as_str().unwrap()
        );
        if !pass {
            failed.push(c["id"].as_u64().unwrap());
        }
    }
    println!("wall time {wall:.1}s");

    let ids: Vec<u64> = criteria.iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, (1..=12).collect::<Vec<_>>());
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
    assert_eq!(out.status.code(), Some(0));
    assert!(wall <= 600.0, "suite took {wall:.1}s");
}
