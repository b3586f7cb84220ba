//! Feeds a noisy classifier output through smoothing, gating and the
//! majority vote, then prints the 10 Hz commands.
//!
//!     cargo run --release --example intent_filter [seed]

use myoteleop::gesture::Gesture;
use myoteleop::intent::{
    CommandAssembler, IntentConfig, LabelInput, COMMAND_PERIOD_MS, LABEL_PERIOD_MS,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let config = IntentConfig::default();
    let left_labels = config.vocabulary[0].clone();
    let mut asm = CommandAssembler::with_config(config);
    // Rest for 0.5 s, wrist forward for 1 s, rest again; one window in
    // five is a confident wrong answer.
    let truth = |t: u64| {
        if (500..1500).contains(&t) {
            Gesture::WristForward
        } else {
            Gesture::Rest
        }
    };
    for t in (0..2500).step_by(LABEL_PERIOD_MS as usize) {
        let target = if rng.gen_bool(0.2) {
            left_labels[rng.gen_range(0..left_labels.len())]
        } else {
            truth(t)
        };
        let probs: Vec<f64> = left_labels
            .iter()
            .map(|&g| {
                if g == target {
                    0.9
                } else {
                    0.1 / (left_labels.len() - 1) as f64
                }
            })
            .collect();
        let r = asm.on_window(
            t,
            LabelInput::Probs(probs),
            LabelInput::Label(Gesture::Rest),
        );
        if let Some(step) = &r.steps[0] {
            println!(
                "{t:>5} ms  truth {:>13}  raw {:>13}  gated {:>13}  voted {:>13}",
                truth(t).name(),
                target.name(),
                step.gated.name(),
                step.voted.map_or("-", |g| g.name())
            );
        }
        if t % COMMAND_PERIOD_MS == 0 {
            let cmd = asm.tick(t);
            println!("           command #{:<3} {}", cmd.seq, cmd.to_json());
        }
    }
    Ok(())
}
