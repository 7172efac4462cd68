//! Render a synthetic sequence (masks, optional depth, ground truth) to disk,
//! either from a built-in scenario or from a JSON scenario file.
//!
//! Run: `cargo run --example synth_sequence -- [preset|scenario.json] [out_dir] [seed]`

use std::path::PathBuf;

use dlotrack::synthgen::{presets, write_sequence, ScenarioSpec};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let which = args.next().unwrap_or_else(|| "occlusion".into());
    let out = args.next().map_or_else(|| std::env::temp_dir().join("dlotrack_synth"), PathBuf::from);
    let seed: u64 = args.next().map_or(Ok(0), |s| s.parse())?;
    let spec = match presets::by_name(&which) {
        Some(spec) => spec,
        None => ScenarioSpec::load(which.as_ref())?,
    };
    println!("scenario spec:\n{}", serde_json::to_string_pretty(&spec)?);
    let gt = write_sequence(&spec, seed, &out)?;
    println!("wrote {} frames to {} (ground truth: {})", spec.frames, out.display(), gt.display());
    Ok(())
}
