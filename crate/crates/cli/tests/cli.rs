use std::process::Command;

fn muntz(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_muntz")).args(args).output().unwrap()
}

#[test]
fn spikes_table_has_quarter_norms() {
    let out = muntz(&["--json-only", "spikes", "--lambda", "geometric:2", "--count", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = rows.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    for r in rows {
        assert!((r["norm"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    }
}

#[test]
fn human_table_lists_every_row() {
    let out = muntz(&["spikes", "--count", "3"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    assert!(text.lines().nth(1).unwrap().contains("0.25000000000000000"));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(muntz(&["c0", "--lambda", "bogus:2", "--n", "3"]).status.code(), Some(64));
    assert_eq!(muntz(&["c0"]).status.code(), Some(64));
    assert_eq!(muntz(&["verify-c0", "/nonexistent/cert.json"]).status.code(), Some(64));
    assert_eq!(muntz(&["weaknull", "--atoms", "0.3"]).status.code(), Some(64));
    assert_eq!(muntz(&["weaknull", "--atoms", "0.3:0.9,0.5:0.9"]).status.code(), Some(64));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(muntz(&["--help"]).status.code(), Some(0));
    assert_eq!(muntz(&["--version"]).status.code(), Some(0));
}

#[test]
fn short_prefix_is_a_limit() {
    let out = muntz(&["c0", "--lambda", "geometric:2:len=12", "--n", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn octa_without_qualifying_k_is_a_limit() {
    let dir = tempfile::tempdir().unwrap();
    let slices = dir.path().join("slices.json");
    std::fs::write(
        &slices,
        r#"[{"functional": [{"x": 1.0, "weight": 1.0}], "epsilon": 0.2, "witness": [{"exponent": 2, "coefficient": 1}]}]"#,
    )
    .unwrap();
    let s = slices.to_str().unwrap();
    let capped = muntz(&["octa", "--slices", s, "--weights", "1", "--eps", "0.05", "--kmax", "2"]);
    assert_eq!(capped.status.code(), Some(2));
    let ok = muntz(&["--json-only", "--canonical", "octa", "--slices", s, "--weights", "1", "--eps", "0.05"]);
    assert_eq!(ok.status.code(), Some(0));
    let cert: serde_json::Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(cert["schema"], "octa-cert/1");
    assert!(cert.get("generated_at").is_none());
}

#[test]
fn timestamp_only_without_canonical() {
    let out = muntz(&["--json-only", "weaknull", "--atoms", "0.3:0.5,0.9:0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v.get("generated_at").is_some());
    assert_eq!(v["k"], 6);
}

#[test]
fn csv_has_x_t_value_columns() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("f.csv");
    let out = muntz(&["--json-only", "c0", "--n", "2", "--csv", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("function,x,t,value"));
    assert_eq!(lines.count(), 2 * 256);
}
