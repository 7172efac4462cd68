//! Two pieces of one cable separated by an occluder are chained back into a
//! single curve; the printout shows the candidate endpoint pairs and costs.
//!
//! Run: `cargo run --example occlusion_bridging`

use dlotrack::chainer::{candidate_pairs, chain_greedy, describe_endpoints, filter_short};
use dlotrack::skeleton::extract;
use dlotrack::synthgen::{presets, render_frame};
use dlotrack::walker::walk_segments;
use dlotrack::TrackerConfig;

fn main() -> anyhow::Result<()> {
    let cfg = TrackerConfig::default();
    let frame = render_frame(&presets::occlusion(), 0, 0)?;
    let skeleton = extract(&frame.mask, cfg.open_kernel);
    let paths = filter_short(walk_segments(&skeleton), cfg.p);
    println!("{} segments after filtering:", paths.len());
    for (i, p) in paths.iter().enumerate() {
        println!("  segment {i}: {} px, {:?} .. {:?}", p.len(), p.head(), p.tail());
    }

    let params = cfg.chainer();
    let ends = describe_endpoints(&paths, params.w)?;
    println!("cheapest endpoint pairs (J = m*distance + (1-m)*orientation):");
    for c in candidate_pairs(&ends, params.m).iter().take(4) {
        println!("  {:?} <-> {:?}  J = {:.3}", c.a, c.b, c.cost);
    }

    let chains = chain_greedy(&paths, &params);
    for (i, ch) in chains.iter().enumerate() {
        println!(
            "chain {i}: {} segments, {} px, bridged gaps {:?}",
            ch.segments.len(),
            ch.point_count(),
            ch.gap_distances.iter().map(|g| format!("{g:.1}")).collect::<Vec<_>>()
        );
    }
    Ok(())
}
