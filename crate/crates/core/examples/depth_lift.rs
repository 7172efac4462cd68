//! A cable winding in depth: the mask gives the image path, the aligned
//! depth map lifts it to 3D before fitting.
//!
//! Run: `cargo run --example depth_lift`

use dlotrack::metrics::{l3_unoriented, DiscretizedCurve};
use dlotrack::synthgen::{presets, render_frame};
use dlotrack::tracker::track_frame_3d;
use dlotrack::TrackerConfig;

fn main() -> anyhow::Result<()> {
    let frame = render_frame(&presets::helix_3d(), 0, 0)?;
    let depth = frame.depth.as_ref().expect("scenario renders depth");
    let result = track_frame_3d(&frame.mask, depth, &TrackerConfig::default())?;
    let curve = &result.instances[0];
    println!("{} instance(s), dimension {}", result.instances.len(), curve.dim());
    let [t0, t1] = curve.t_range();
    for i in 0..=5 {
        let p = curve.evaluate(t0 + (t1 - t0) * f64::from(i) / 5.0)?;
        println!("  t={:>5.1}: x={:>6.1} y={:>6.1} z={:>6.1}", t0 + (t1 - t0) * f64::from(i) / 5.0, p[0], p[1], p[2]);
    }
    let l3 = l3_unoriented(&DiscretizedCurve::from_curve(curve, 512)?, &frame.truth[0]);
    println!("L3 against the 3D reference: {l3:.3}");
    if !result.diagnostics.fallback_2d.is_empty() {
        println!("fitted in 2D (no depth): {:?}", result.diagnostics.fallback_2d);
    }
    Ok(())
}
