//! Tracks every built-in synthetic scenario and prints accuracy per scene.
//!
//! Run: `cargo run --example scenario_suite [seed]`

use dlotrack::synthgen::{presets, score_scenario};
use dlotrack::TrackerConfig;

fn main() -> anyhow::Result<()> {
    let seed = std::env::args().nth(1).map_or(Ok(0), |s| s.parse())?;
    let cfg = TrackerConfig::default();
    println!("scenario\tframes\tmean_l3_px\tmax_l3_px\tinstance_counts\tmissing\tredundant\tmean_ms");
    for name in presets::NAMES {
        let spec = presets::by_name(name).expect("preset exists");
        let score = score_scenario(&spec, seed, &cfg)?;
        let max = score.frames.iter().filter_map(|f| f.l3).fold(0.0, f64::max);
        let mut counts = std::collections::BTreeMap::new();
        for f in &score.frames {
            *counts.entry(f.instances).or_insert(0) += 1;
        }
        let missing: usize = score.frames.iter().map(|f| f.missing).sum();
        let redundant: usize = score.frames.iter().map(|f| f.redundant).sum();
        let ms = score.frames.iter().map(|f| f.elapsed_ms).sum::<f64>() / score.frames.len() as f64;
        println!(
            "{name}\t{}\t{:.3}\t{max:.3}\t{counts:?}\t{missing}\t{redundant}\t{ms:.2}",
            score.frames.len(),
            score.mean_l3().unwrap_or(f64::NAN),
        );
    }
    Ok(())
}
