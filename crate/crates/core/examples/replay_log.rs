//! Records a scripted session to a hash-chained log, verifies the chain,
//! replays it, and shows that an edited line is caught.
//!
//!     cargo run --release --example replay_log [log-path]

use myoteleop::service::{read_log, replay, run_headless, verify_chain, Scenario, ServiceConfig};
use myoteleop::sim::World;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(std::path::PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("myoteleop-replay.jsonl"));
    let scenario: Scenario = serde_json::from_str(
        r#"{"name": "replay-demo", "duration_ms": 8000, "operator": {"type": "script", "steps": [
            {"type": "text", "at_ms": 0, "text": "start gesture mode"},
            {"type": "hold", "from_ms": 200, "to_ms": 3000, "left": "wrist_forward", "right": "rest"},
            {"type": "hold", "from_ms": 3000, "to_ms": 5000, "left": "wrist_supination", "right": "rest"},
            {"type": "text", "at_ms": 5500, "text": "next mode"},
            {"type": "hold", "from_ms": 6000, "to_ms": 7500, "left": "rest", "right": "wrist_forward"}
        ]}}"#,
    )?;
    let (outcome, log) = run_headless(ServiceConfig::default(), World::two_room(), scenario, 9)?;
    log.write(&path)?;
    println!("{} records -> {}", log.records().len(), path.display());

    let records = read_log(&path)?;
    verify_chain(&records)?;
    let report = replay(&records, World::two_room(), None)?;
    println!(
        "replayed {} events; final pose bitwise equal: {}",
        report.events_matched,
        report.final_bits == outcome.final_bits
    );

    // Flip one forward command to wrist-back without fixing the hashes.
    let mut edited = false;
    let tampered: String = std::fs::read_to_string(&path)?
        .lines()
        .map(|line| {
            let mut v: serde_json::Value = serde_json::from_str(line).expect("log line");
            if !edited
                && v["kind"] == "command"
                && v["payload"]["command"]["left"] == "wrist_forward"
            {
                v["payload"]["command"]["left"] = "wrist_back".into();
                edited = true;
            }
            format!("{v}\n")
        })
        .collect();
    let bad = path.with_extension("tampered.jsonl");
    std::fs::write(&bad, tampered)?;
    match read_log(&bad).and_then(|r| verify_chain(&r)) {
        Ok(()) => println!("tampered log unexpectedly verified"),
        Err(e) => println!("tampered log rejected: {e}"),
    }
    Ok(())
}
