//! Builds RMS heatmaps from the synthetic subject and prints the mean map
//! per gesture for one arm as shaded text.
//!
//!     cargo run --release --example heatmaps [left|right]

use myoteleop::gesture::{Arm, Gesture};
use myoteleop::ml::{build_dataset, CueSchedule};
use myoteleop::stream::{SleeveLayout, GRID_COLS};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arm: Arm = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "left".into())
        .parse()?;
    let cues = CueSchedule::standard(&Gesture::ALL, 1, 1, (0.25, 0.25));
    let datasets = build_dataset(
        cues.synthetic_source(3, 1)?,
        &cues,
        &SleeveLayout::default(),
    )?;
    let shades = [' ', '.', ':', '-', '=', '+', '*', '#', '%', '@'];
    for (gesture, mean) in datasets[arm.index()].mean_heatmaps() {
        let max = mean.iter().cloned().fold(f64::MIN, f64::max);
        println!("{arm} {} (peak {max:.1} uV)", gesture.name());
        for row in mean.chunks(GRID_COLS) {
            let line: String = row
                .iter()
                .map(|v| shades[((v / max) * 9.0).round().clamp(0.0, 9.0) as usize])
                .flat_map(|c| [c, c])
                .collect();
            println!("  |{line}|");
        }
    }
    Ok(())
}
