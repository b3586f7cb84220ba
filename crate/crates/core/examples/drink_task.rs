//! Runs the cup-fetching task twice, once by pure gesture teleoperation and
//! once with room navigation and auto-alignment, and compares completion.
//!
//!     cargo run --release --example drink_task [seed] [log-dir]

use std::path::PathBuf;

use myoteleop::service::{replay, run_headless, ExpertStyle, Scenario, ServiceConfig};
use myoteleop::sim::World;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(1);
    let out: Option<PathBuf> = args.next().map(PathBuf::from);
    for style in [ExpertStyle::Teleop, ExpertStyle::Assisted] {
        let scenario = Scenario::drink(style);
        let name = scenario.name.clone();
        let (outcome, log) =
            run_headless(ServiceConfig::default(), World::two_room(), scenario, seed)?;
        let p = outcome.final_pose;
        match &outcome.task {
            Some(r) => println!(
                "{name}: completed={} in {:.1}s ({} ticks), {} commands, final pose ({:.2}, {:.2}, {:.2})",
                r.completed, r.elapsed_s, r.ticks, outcome.commands, p.x, p.y, p.theta
            ),
            None => println!("{name}: no result by {} ms, pose ({:.2}, {:.2}, {:.2})", outcome.end_ms, p.x, p.y, p.theta),
        }
        let report = replay(log.records(), World::two_room(), None)?;
        println!(
            "  replay: {} events matched, final state identical",
            report.events_matched
        );
        if let Some(dir) = &out {
            let path = dir.join(format!("{name}.jsonl"));
            log.write(&path)?;
            println!("  log written to {}", path.display());
        }
    }
    Ok(())
}
