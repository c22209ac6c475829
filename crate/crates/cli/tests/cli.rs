use std::process::Command;

fn softnet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_softnet"))
}

#[test]
fn missing_scenario_is_reported_with_its_path() {
    let out = softnet()
        .args(["run", "--scenario", "/nonexistent/dir/scenario.toml"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/dir/scenario.toml"), "{err}");
}

#[test]
fn invalid_value_names_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(&path, "[control]\nthrust_limit = -5.0\n").unwrap();
    let out = softnet()
        .args(["run", "--scenario"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("control.thrust_limit"));
}

#[test]
fn short_run_prints_metrics_and_echoes_the_configuration() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.toml");
    std::fs::write(&scenario, "timeout_s = 0.4\n").unwrap();
    let echo = dir.path().join("echo.toml");
    let trace = dir.path().join("trace.csv");
    let out = softnet()
        .args(["run", "--scenario"])
        .arg(&scenario)
        .arg("--echo")
        .arg(&echo)
        .arg("--record")
        .arg(&trace)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["steps"], 20);
    assert_eq!(doc["termination"], "timeout");
    assert_eq!(doc["config"]["timeout_s"], 0.4);
    assert!(std::fs::read_to_string(&echo).unwrap().contains("timeout_s = 0.4"));
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(csv.lines().count(), 21);
}

#[test]
fn batch_then_report_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("s.toml");
    std::fs::write(
        &scenario,
        "timeout_s = 0.2\n[batch]\nsamples = 2\ncombinations = [{ controller = \"pid\", net_model = \"shell\" }]\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let status = softnet()
        .args(["batch", "--workers", "1", "--scenario"])
        .arg(&scenario)
        .arg("--out")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    for f in ["episodes.csv", "summary.json", "distributions.json", "scenario.toml", "scatter_fuel.svg"] {
        assert!(out_dir.join(f).exists(), "{f} missing");
    }
    let report = softnet().args(["report", "--in"]).arg(&out_dir).output().unwrap();
    assert!(report.status.success());
    let doc: serde_json::Value = serde_json::from_slice(&report.stdout).unwrap();
    assert!(doc.to_string().contains("pid+shell"));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = softnet().arg("fly").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
