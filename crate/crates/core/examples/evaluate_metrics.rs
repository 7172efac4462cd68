//! The evaluation measures on a tracked frame: mean minimal distance between
//! mask and curve in both directions (L1, L2) and the aligned curve distance
//! L3 against the reference, in both orientations.
//!
//! Run: `cargo run --example evaluate_metrics`

use dlotrack::metrics::{l1_l2, l3, l3_unoriented, DiscretizedCurve, Summary};
use dlotrack::synthgen::{presets, Scenario};
use dlotrack::tracker::track_frame;
use dlotrack::TrackerConfig;

fn main() -> anyhow::Result<()> {
    let scenario = Scenario::new(presets::high_curvature(), 0)?;
    let cfg = TrackerConfig::default();
    let mut l3s = Vec::new();
    println!("frame\tL1\tL2\tL3\tL3(reversed)");
    for f in (0..scenario.frames()).step_by(10) {
        let frame = scenario.render(f)?;
        let r = track_frame(&frame.mask, &cfg)?;
        let (l1, l2) = l1_l2(&frame.mask, &r.instances, 512)?;
        let pred = DiscretizedCurve::from_curve(&r.instances[0], 512)?;
        let truth = &frame.truth[0];
        let best = l3_unoriented(&pred, truth);
        println!("{f}\t{l1:.3}\t{l2:.3}\t{best:.3}\t{:.3}", l3(&pred, &truth.reversed()));
        l3s.push(best);
    }
    let s = Summary::of(&l3s).expect("frames evaluated");
    println!("L3 mean {:.3} ± {:.3} (population std, n={})", s.mean, s.std, s.count);
    Ok(())
}
