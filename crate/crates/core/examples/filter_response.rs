//! Prints the preprocessing chain's magnitude response and its step
//! response settling.
//!
//!     cargo run --release --example filter_response

use myoteleop::dsp::{FilterChain, FilterSpec};

fn main() {
    let spec = FilterSpec::default();
    let mut chain = FilterChain::new(spec, 1);
    let fs = spec.sample_rate_hz;
    println!("{:>8}  {:>9}", "Hz", "gain dB");
    for f in [
        1.0, 5.0, 10.0, 20.0, 40.0, 55.0, 59.0, 60.0, 61.0, 65.0, 100.0, 250.0, 500.0, 1000.0,
    ] {
        println!("{f:>8.0}  {:>9.2}", 20.0 * chain.gain_at(fs, f).log10());
    }
    let y = chain.process_signal(&vec![100.0; fs as usize]);
    println!("\n100 uV step:");
    for ms in [1, 10, 50, 100, 200, 300, 500, 900] {
        let i = (ms as f64 * fs / 1000.0) as usize;
        println!("  t = {ms:>3} ms  y = {:+.4} uV", y[i]);
    }
}
