//! Minimal console client for a running `teleopd serve`: starts gesture
//! mode, holds wrist-forward on the left arm for a second and prints what
//! the service sends back.
//!
//!     cargo run --release --bin teleopd -- serve &
//!     cargo run --release --example console_client [127.0.0.1:7700]

use std::net::SocketAddr;
use std::thread;
use std::time::{Duration, Instant};

use myoteleop::gesture::Gesture;
use myoteleop::service::{ConsoleClient, ConsoleIn, ConsoleOut};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let addr: SocketAddr = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "127.0.0.1:7700".into())
        .parse()?;
    let mut client = ConsoleClient::connect(addr)?;
    client.send(&ConsoleIn::TextCommand {
        text: "start gesture mode".into(),
    })?;
    let t0 = Instant::now();
    let mut next_key = Duration::ZERO;
    while t0.elapsed() < Duration::from_secs(3) {
        let held = t0.elapsed() < Duration::from_secs(1);
        if t0.elapsed() >= next_key {
            let left = if held {
                Gesture::WristForward
            } else {
                Gesture::Rest
            };
            client.send(&ConsoleIn::KeyboardGesture {
                left,
                right: Gesture::Rest,
            })?;
            next_key += Duration::from_millis(40);
        }
        match client.recv(Duration::from_millis(10))? {
            Some(ConsoleOut::State(s)) => println!(
                "state  t={:>6} pose ({:.2}, {:.2}, {:.2}) mode {} gestures {}",
                s.t_ms, s.pose[0], s.pose[1], s.pose[2], s.mode, s.gesture_active
            ),
            Some(ConsoleOut::CommandEcho { command, .. }) if command.left != Gesture::Rest => {
                println!("command {}", command.to_json())
            }
            Some(ConsoleOut::Log { event, payload, .. }) => println!("event  {event} {payload}"),
            Some(ConsoleOut::Mode { mode, source, .. }) => println!("mode   {mode} ({source})"),
            _ => {}
        }
        thread::yield_now();
    }
    Ok(())
}
