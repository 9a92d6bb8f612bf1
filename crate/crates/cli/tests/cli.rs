use std::path::Path;
use std::process::{Command, Output};

fn ric(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ric"))
        .current_dir(dir)
        .env_remove("RIC_OUT_DIR")
        .args(args)
        .output()
        .expect("binary runs")
}

fn report_without_timing(path: &Path) -> serde_json::Value {
    let mut v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut()
        .unwrap()
        .remove("wall_time_ms")
        .expect("timing field present");
    v
}

fn error_kind(out: &Output) -> String {
    let v: serde_json::Value =
        serde_json::from_slice(&out.stderr).expect("structured error on stderr");
    v["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn repeated_runs_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"dim": 3, "task": "ric", "channel": {"random_general_pure": {"seed": 5, "u": 2, "v": 1}},
                     "assignment": "fig2", "p": 0.3, "input": {"seed": 9}}"#;
    std::fs::write(dir.path().join("cfg.json"), config).unwrap();
    for out in ["a", "b"] {
        let o = ric(dir.path(), &["--config", "cfg.json", "--out", out]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let name = "ric_d3_general_pure_fig2_seed0.json";
    let a = report_without_timing(&dir.path().join("a").join(name));
    let b = report_without_timing(&dir.path().join("b").join(name));
    assert_eq!(
        serde_json::to_string(&a).unwrap(),
        serde_json::to_string(&b).unwrap()
    );
    assert_eq!(a["summary"]["branches"], 729);
    assert!(a["summary"]["min_fidelity"].as_f64().unwrap() > 1.0 - 1e-10);
    assert_eq!(a["config"]["mode"], "enumerate");
    assert!(a["config"].get("out").is_none());
}

#[test]
fn flags_and_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("ch.json"), r#"{"kind": "ghz", "c": 1}"#).unwrap();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_ric"))
            .current_dir(dir.path())
            .env("RIC_OUT_DIR", "from-env")
            .args([
                "--dim",
                "4",
                "--task",
                "ric",
                "--channel-file",
                "ch.json",
                "--assignment",
                "fig1",
                "--samples",
                "30",
                "--seed",
                "3",
            ])
            .output()
            .unwrap()
    };
    assert!(run().status.success());
    assert!(run().status.success());
    let env_dir = dir.path().join("from-env");
    let report = report_without_timing(&env_dir.join("ric_d4_ghz_fig1_seed3.json"));
    assert_eq!(report["summary"]["branches"], 30);
    assert_eq!(report["config"]["mode"]["sample"]["samples"], 30);
    let csv = std::fs::read_to_string(env_dir.join("summary.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines[0],
        "task,d,channel_tag,assignment,branches,min_fidelity,mean_fidelity,seed"
    );
}

#[test]
fn rejects_large_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let o = ric(dir.path(), &["--dim", "8", "--task", "ric"]);
    assert!(!o.status.success());
    assert_eq!(error_kind(&o), "dimension_too_large");
    assert!(String::from_utf8_lossy(&o.stderr).contains("at most 7"));
}

#[test]
fn reports_malformed_configs() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"dim": 3, "task": "ric", "unknown": true}"#,
    )
    .unwrap();
    let o = ric(dir.path(), &["--config", "bad.json"]);
    assert!(!o.status.success());
    assert_eq!(error_kind(&o), "json");
    std::fs::write(
        dir.path().join("neg.json"),
        r#"{"dim": 3, "task": "ric", "p": 1.5}"#,
    )
    .unwrap();
    let o = ric(dir.path(), &["--config", "neg.json"]);
    assert_eq!(error_kind(&o), "invalid_params");
    let o = ric(
        dir.path(),
        &["--dim", "3", "--task", "ric", "--assignment", "fig7"],
    );
    assert_eq!(error_kind(&o), "invalid_assignment");
}

#[test]
fn verify_task_lists_every_check() {
    let dir = tempfile::tempdir().unwrap();
    let o = ric(
        dir.path(),
        &["--dim", "2", "--task", "verify", "--out", "v"],
    );
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(!stdout.contains("[FAIL]"));
    assert!(stdout.contains("[PASS] d=2 telecloning_like_equals_telecloning_channel"));
}
