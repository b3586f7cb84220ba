//! Records the default cue protocol from the synthetic subject, then trains
//! and evaluates one classifier per arm.
//!
//!     cargo run --release --example train_classifier [seed]

use std::time::Instant;

use myoteleop::gesture::{default_vocabulary, Arm};
use myoteleop::ml::{build_dataset, split, train, CueSchedule, TrainConfig};
use myoteleop::stream::SleeveLayout;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(7);
    let cues = CueSchedule::default_session();
    let t0 = Instant::now();
    let source = cues.synthetic_source(seed, 1)?;
    let datasets = build_dataset(source, &cues, &SleeveLayout::default())?;
    println!(
        "{} trials, {} windows per arm ({:.1}s)",
        cues.trials.len(),
        datasets[0].samples.len(),
        t0.elapsed().as_secs_f64()
    );
    for arm in Arm::BOTH {
        let t = Instant::now();
        let data = split(
            &datasets[arm.index()].restrict(&default_vocabulary(arm)),
            seed,
        )?;
        let (_, report) = train(&data, &TrainConfig::default(), seed)?;
        let test = report.test.as_ref().expect("test split");
        println!(
            "{arm}: {:?} selected epoch {} test accuracy {:.4} ({:.1}s)",
            report.labels,
            report.selected_epoch,
            test.accuracy,
            t.elapsed().as_secs_f64()
        );
        for (g, row) in report.labels.iter().zip(&test.confusion) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.2}")).collect();
            println!("  {:>17} {}", g.name(), cells.join(" "));
        }
    }
    Ok(())
}
