use std::process::{Command, Output};

use serde_json::Value;

fn teleopd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_teleopd"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("run teleopd")
}

fn json_out(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn simulate_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = dir.path().join("scenario.json");
    std::fs::write(
        &scenario,
        r#"{"name": "cli", "duration_ms": 3000, "operator": {"type": "script", "steps": [
            {"type": "text", "at_ms": 0, "text": "start gesture mode"},
            {"type": "hold", "from_ms": 100, "to_ms": 2500, "left": "wrist_forward", "right": "rest"}
        ]}}"#,
    )
    .unwrap();
    let log = dir.path().join("session.jsonl");
    let sim = json_out(&teleopd(&[
        "simulate",
        "--scenario",
        scenario.to_str().unwrap(),
        "--seed",
        "4",
        "--log",
        log.to_str().unwrap(),
    ]));
    assert_eq!(sim["commands"], 30);
    assert!(sim["final_pose"][0].as_f64().unwrap() > 1.6);

    let rep = json_out(&teleopd(&["replay", "--log", log.to_str().unwrap()]));
    assert_eq!(rep["final_pose"], sim["final_pose"]);
    assert_eq!(rep["end_ms"], sim["end_ms"]);
}

#[test]
fn headless_serve_is_simulate() {
    let a = json_out(&teleopd(&["serve", "--headless", "--duration-s", "2"]));
    let b = json_out(&teleopd(&["simulate"]));
    assert_eq!(a["end_ms"], 2000);
    assert_eq!(b["end_ms"], 60000);
}

#[test]
fn missing_model_is_reported() {
    let out = teleopd(&["evaluate", "--model", "/nowhere/left.json"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nowhere/left.json"), "{err}");
}

#[test]
fn tampered_log_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("s.jsonl");
    json_out(&teleopd(&["simulate", "--log", log.to_str().unwrap()]));
    let text = std::fs::read_to_string(&log).unwrap();
    let edited = text.replacen("\"seq\":5,", "\"seq\":6,", 1);
    assert_ne!(edited, text);
    std::fs::write(&log, edited).unwrap();
    let out = teleopd(&["replay", "--log", log.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("chain"));
}
