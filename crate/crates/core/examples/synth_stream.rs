//! Generates a short two-gesture session from the synthetic subject and
//! prints frame counts and per-arm RMS for each hold.
//!
//!     cargo run --release --example synth_stream [seed]

use myoteleop::gesture::{Arm, Gesture};
use myoteleop::ml::CueSchedule;
use myoteleop::stream::{EmgFrame, FRAME_SAMPLES, SAMPLE_RATE_HZ, UV_PER_LSB};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(7);
    let cues = CueSchedule::standard(
        &[
            Gesture::Rest,
            Gesture::WristForward,
            Gesture::WristSupination,
        ],
        1,
        1,
        (0.2, 0.3),
    );
    let frames: Vec<EmgFrame> = cues.synthetic_source(seed, 1)?.collect();
    let samples: usize = frames.iter().map(|f| f.n_samples()).sum();
    println!(
        "{} frames of {FRAME_SAMPLES} samples, {:.1} s at {SAMPLE_RATE_HZ} Hz",
        frames.len(),
        samples as f64 / SAMPLE_RATE_HZ as f64
    );
    for (i, trial) in cues.trials.iter().enumerate() {
        let (lo, hi) = cues.labeled_range(i);
        print!("{:>17}:", trial.gesture.name());
        for arm in Arm::BOTH {
            let (mut sum, mut n) = (0.0, 0usize);
            for f in frames
                .iter()
                .filter(|f| f.sample_index >= lo && f.end_index() <= hi)
            {
                for v in f.channel(arm, 0).chain(f.channel(arm, 40)) {
                    let uv = v as f64 * UV_PER_LSB;
                    sum += uv * uv;
                    n += 1;
                }
            }
            print!("  {arm} rms {:7.1} uV", (sum / n as f64).sqrt());
        }
        println!();
    }
    Ok(())
}
