//! Several cables in one frame become separate curves, matched against
//! ground truth with missing/redundant counts.
//!
//! Run: `cargo run --example multi_instance`

use dlotrack::metrics::{match_instances, DiscretizedCurve};
use dlotrack::synthgen::{presets, render_frame};
use dlotrack::tracker::track_frame;
use dlotrack::TrackerConfig;

fn main() -> anyhow::Result<()> {
    let frame = render_frame(&presets::two_cables(), 25, 0)?;
    let result = track_frame(&frame.mask, &TrackerConfig::default())?;
    let predicted = result
        .instances
        .iter()
        .map(|c| DiscretizedCurve::from_curve(c, 512))
        .collect::<dlotrack::Result<Vec<_>>>()?;
    let m = match_instances(&predicted, &frame.truth);
    println!("{} instances, {} cables in ground truth", predicted.len(), frame.truth.len());
    for (p, r, l3) in &m.pairs {
        println!("  prediction {p} <-> cable {r}: L3 = {l3:.3} px");
    }
    println!("missing {}, redundant {}", m.missing, m.redundant);
    Ok(())
}
