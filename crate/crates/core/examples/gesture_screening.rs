//! Screens candidate gestures by the cosine similarity of their mean
//! heatmaps and prints the matrix and the admitted set per arm.
//!
//!     cargo run --release --example gesture_screening [threshold]

use myoteleop::gesture::{Arm, Gesture};
use myoteleop::ml::{build_dataset, screen_gestures, CueSchedule};
use myoteleop::stream::SleeveLayout;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let threshold: f64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(0.9);
    let cues = CueSchedule::standard(&Gesture::ALL, 1, 2, (0.2, 0.3));
    let datasets = build_dataset(
        cues.synthetic_source(5, 1)?,
        &cues,
        &SleeveLayout::default(),
    )?;
    for arm in Arm::BOTH {
        let means: Vec<(String, Vec<f64>)> = datasets[arm.index()]
            .mean_heatmaps()
            .into_iter()
            .filter(|(g, _)| *g != Gesture::Rest)
            .map(|(g, m)| (g.name().to_string(), m))
            .collect();
        let s = screen_gestures(&means, threshold)?;
        println!("{arm} arm, threshold {threshold}:");
        for (name, row) in s.names.iter().zip(&s.similarity) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:.3}")).collect();
            println!("  {name:>17} {}", cells.join(" "));
        }
        println!("  admitted: {}", s.selected.join(", "));
    }
    Ok(())
}
