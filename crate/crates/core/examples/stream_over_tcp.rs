//! Serves the synthetic subject over TCP, consumes it on another thread,
//! preprocesses to windows and prints a heatmap summary per 0.5 s.
//!
//!     cargo run --release --example stream_over_tcp [--realtime]

use std::net::TcpListener;
use std::thread;

use myoteleop::dsp::{percentile_nearest_rank, rms_heatmap, Preprocessor};
use myoteleop::gesture::{Arm, Gesture};
use myoteleop::ml::CueSchedule;
use myoteleop::stream::{consume_stream, serve_stream, Pacing, SleeveLayout, StreamEvent};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let pacing = if std::env::args().any(|a| a == "--realtime") {
        Pacing::RealTime
    } else {
        Pacing::Headless
    };
    let cues = CueSchedule::standard(
        &[Gesture::WristForward, Gesture::WristBack],
        1,
        1,
        (0.3, 0.3),
    );
    let source = cues.synthetic_source(2, 1)?;
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let server = thread::spawn(move || serve_stream(source, &listener, pacing));

    let layout = SleeveLayout::default();
    let mut pre = Preprocessor::default();
    let mut windows = 0;
    for ev in consume_stream(addr)? {
        match ev {
            StreamEvent::Frame(f) => {
                for w in pre.push_frame(&f) {
                    windows += 1;
                    if windows % 12 != 0 {
                        continue;
                    }
                    let p90: Vec<String> = Arm::BOTH
                        .iter()
                        .map(|&arm| {
                            let h = rms_heatmap(&w, arm, &layout).expect("valid window");
                            format!(
                                "{arm} p90 {:6.1} uV",
                                percentile_nearest_rank(&h.cells, 90.0)
                            )
                        })
                        .collect();
                    println!(
                        "{:5.2} s  {}",
                        w.start_sample_index as f64 / 4000.0,
                        p90.join("  ")
                    );
                }
            }
            StreamEvent::Dropout { expected, got } => println!("dropout [{expected}, {got})"),
            StreamEvent::Ended { reason } => {
                println!("stream ended: {reason}");
                break;
            }
        }
    }
    let report = server.join().expect("server thread")?;
    println!("{} frames sent, {windows} windows", report.frames_sent);
    Ok(())
}
