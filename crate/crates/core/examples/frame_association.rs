//! Keeping instance identities across frames. The tracker itself is
//! stateless; consecutive results are paired by smallest L3.
//!
//! Run: `cargo run --example frame_association`

use dlotrack::synthgen::{presets, Scenario};
use dlotrack::tracker::{associate_instances, track_frame};
use dlotrack::TrackerConfig;

fn main() -> anyhow::Result<()> {
    let scenario = Scenario::new(presets::two_cables(), 0)?;
    let cfg = TrackerConfig::default();
    // identity per instance index of the current frame
    let mut ids: Vec<usize> = Vec::new();
    let mut previous = Vec::new();
    let mut next_id = 0;
    for f in (0..scenario.frames()).step_by(7) {
        let current = track_frame(&scenario.render(f)?.mask, &cfg)?.instances;
        let m = associate_instances(&previous, &current, 256)?;
        let mut new_ids = vec![usize::MAX; current.len()];
        for &(cur, prev, _) in &m.pairs {
            new_ids[cur] = ids[prev];
        }
        for id in new_ids.iter_mut().filter(|id| **id == usize::MAX) {
            *id = next_id;
            next_id += 1;
        }
        let desc: Vec<String> = current
            .iter()
            .zip(&new_ids)
            .map(|(c, id)| {
                let p = c.evaluate(c.t_range()[0]).expect("in range");
                format!("id {id} starts at ({:.0}, {:.0})", p[0], p[1])
            })
            .collect();
        println!("frame {f:>2}: {}", desc.join("; "));
        ids = new_ids;
        previous = current;
    }
    Ok(())
}
