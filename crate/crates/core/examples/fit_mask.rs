//! Fit curves to one mask image and write the curve document.
//!
//! Run: `cargo run --example fit_mask -- [mask.png] [out.json]`
//! Without arguments a synthetic S-curve is rendered and fitted.

use std::path::PathBuf;

use dlotrack::mask_io::{load_mask, write_curves};
use dlotrack::synthgen::{presets, render_frame};
use dlotrack::tracker::track_frame;
use dlotrack::TrackerConfig;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let (mask, source) = match args.next() {
        Some(p) => (load_mask(p.as_ref(), 127)?, p),
        None => (render_frame(&presets::plain(), 0, 1)?.mask, "synthetic:plain".to_owned()),
    };
    let out = args.next().map_or_else(|| std::env::temp_dir().join("fit_mask.json"), PathBuf::from);

    let result = track_frame(&mask, &TrackerConfig::default())?;
    println!(
        "{}x{} mask, {} foreground pixels -> {} instance(s) in {:.2} ms",
        mask.width(),
        mask.height(),
        mask.count(),
        result.instances.len(),
        result.elapsed_ms
    );
    for (i, c) in result.instances.iter().enumerate() {
        let [t0, t1] = c.t_range();
        let (a, b) = (c.evaluate(t0)?, c.evaluate(t1)?);
        println!(
            "  #{i}: {} control points, arc length ~{:.0} px, from ({:.1}, {:.1}) to ({:.1}, {:.1})",
            c.control_count(),
            t1 - t0,
            a[0],
            a[1],
            b[0],
            b[1]
        );
    }
    for (stage, ms) in &result.stage_timings {
        println!("  {:<12} {ms:.3} ms", stage.to_string());
    }
    write_curves(&result.to_document(&source), &out)?;
    println!("wrote {}", out.display());
    Ok(())
}
