//! Per-stage latency on a 1280x720 synthetic frame.
//!
//! Run: `cargo run --release --example latency -- [reps]`

use dlotrack::cli::benchmark;
use dlotrack::synthgen::{presets, render_frame};
use dlotrack::TrackerConfig;

fn main() -> anyhow::Result<()> {
    let reps = std::env::args().nth(1).map_or(Ok(30), |s| s.parse())?;
    let mask = render_frame(&presets::hd(), 0, 0)?.mask;
    let stats = benchmark(&[mask], &TrackerConfig::default(), reps, 3)?;
    println!("{:<12} {:>8} {:>10} {:>8}", "stage", "min_ms", "median_ms", "p95_ms");
    for s in stats {
        println!("{:<12} {:>8.3} {:>10.3} {:>8.3}", s.stage, s.min, s.median, s.p95);
    }
    Ok(())
}
