//! Per-frame pipeline: open → skeletonize → walk → chain → fit.
//!
//! The tracker is stateless. Every frame is fitted from scratch, so frames
//! can be processed in any order or concurrently.

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::chainer::{chain_greedy, filter_short, ChainerParams, SegmentChain};
use crate::error::{Error, Result};
use crate::mask_io::{BinaryMask, CurveDocument, DepthMap, FrameMeta};
use crate::metrics::{match_instances, DiscretizedCurve, InstanceMatching};
use crate::skeleton::{morphological_open, remove_branch_points, skeletonize};
use crate::spline::{fit_adaptive, lift_to_3d, parameterize, BSplineCurve, ParameterizedChain};
use crate::walker::walk_segments;

/// All tunables of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackerConfig {
    /// Distance weight in the connection cost.
    pub m: f64,
    /// Minimum segment length (points).
    pub p: usize,
    /// Interior knot count.
    pub k: usize,
    /// Connection threshold.
    pub j_th: f64,
    /// Tangent estimation window (points).
    pub w: usize,
    /// Side of the square opening kernel.
    pub open_kernel: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            m: 0.05,
            p: 10,
            k: 25,
            j_th: 10.0,
            w: 10,
            open_kernel: 3,
        }
    }
}

impl TrackerConfig {
    #[must_use]
    pub fn chainer(&self) -> ChainerParams {
        ChainerParams {
            m: self.m,
            p: self.p,
            j_th: self.j_th,
            w: self.w,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.chainer().validate()?;
        if self.k < 1 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.open_kernel < 3 || self.open_kernel.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "open_kernel = {} must be odd and >= 3",
                self.open_kernel
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Open,
    Skeletonize,
    Walk,
    Chain,
    Fit,
}

impl Stage {
    pub const ALL: [Stage; 5] = [
        Stage::Open,
        Stage::Skeletonize,
        Stage::Walk,
        Stage::Chain,
        Stage::Fit,
    ];
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Open => "open",
            Stage::Skeletonize => "skeletonize",
            Stage::Walk => "walk",
            Stage::Chain => "chain",
            Stage::Fit => "fit",
        })
    }
}

/// Counters and per-instance notes collected while processing a frame.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub skeleton_pixels: usize,
    pub segments: usize,
    pub segments_kept: usize,
    /// Chains dropped because they could not be fitted, with the reason.
    pub skipped: Vec<String>,
    /// Indices (into `instances`) fitted in 2D because no depth was available.
    pub fallback_2d: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct FrameResult {
    pub width: usize,
    pub height: usize,
    pub instances: Vec<BSplineCurve>,
    /// The chain each instance was fitted to, same order.
    pub chains: Vec<SegmentChain>,
    pub elapsed_ms: f64,
    pub stage_timings: BTreeMap<Stage, f64>,
    pub diagnostics: Diagnostics,
}

impl FrameResult {
    #[must_use]
    pub fn to_document(&self, source: &str) -> CurveDocument {
        CurveDocument {
            frame: FrameMeta {
                width: self.width,
                height: self.height,
                source: source.to_owned(),
                elapsed_ms: self.elapsed_ms,
            },
            instances: self.instances.iter().map(BSplineCurve::to_instance).collect(),
        }
    }
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Mask-to-chains half of the pipeline, shared by the 2D and 3D entry points.
fn chains_for(
    mask: &BinaryMask,
    cfg: &TrackerConfig,
    timings: &mut BTreeMap<Stage, f64>,
    diag: &mut Diagnostics,
) -> Vec<SegmentChain> {
    let t = Instant::now();
    let opened = morphological_open(mask, cfg.open_kernel);
    timings.insert(Stage::Open, ms_since(t));

    let t = Instant::now();
    let skeleton = remove_branch_points(&skeletonize(&opened));
    timings.insert(Stage::Skeletonize, ms_since(t));
    diag.skeleton_pixels = skeleton.len();

    let t = Instant::now();
    let paths = walk_segments(&skeleton);
    timings.insert(Stage::Walk, ms_since(t));
    diag.segments = paths.len();

    let t = Instant::now();
    let kept = filter_short(paths, cfg.p.max(2));
    diag.segments_kept = kept.len();
    let chains = chain_greedy(&kept, &cfg.chainer())
        .into_iter()
        .map(|c| if c.last() < c.first() { c.reversed() } else { c })
        .collect();
    timings.insert(Stage::Chain, ms_since(t));
    chains
}

/// Fits one curve per chain; `param` builds the data for each chain and may
/// fail, in which case `on_error` decides whether to fall back or skip.
fn fit_chains(
    chains: Vec<SegmentChain>,
    k: usize,
    diag: &mut Diagnostics,
    mut param: impl FnMut(&SegmentChain) -> Result<ParameterizedChain>,
) -> (Vec<BSplineCurve>, Vec<SegmentChain>) {
    let mut instances = Vec::with_capacity(chains.len());
    let mut kept = Vec::with_capacity(chains.len());
    for (i, chain) in chains.into_iter().enumerate() {
        let pc = match param(&chain) {
            Ok(pc) => pc,
            Err(Error::NoDepthSupport) => {
                diag.fallback_2d.push(instances.len());
                parameterize(&chain)
            }
            Err(e) => {
                diag.skipped.push(format!("chain {i}: {e}"));
                continue;
            }
        };
        match fit_adaptive(&pc, k) {
            Ok(curve) => {
                instances.push(curve);
                kept.push(chain);
            }
            Err(e) => {
                if diag.fallback_2d.last() == Some(&instances.len()) {
                    diag.fallback_2d.pop();
                }
                diag.skipped.push(format!("chain {i}: {e}"));
            }
        }
    }
    (instances, kept)
}

/// Fits one cubic B-spline per detected object in a 2D mask.
pub fn track_frame(mask: &BinaryMask, cfg: &TrackerConfig) -> Result<FrameResult> {
    cfg.validate()?;
    let start = Instant::now();
    let mut timings = BTreeMap::new();
    let mut diag = Diagnostics::default();
    let chains = chains_for(mask, cfg, &mut timings, &mut diag);
    let t = Instant::now();
    let (instances, chains) = fit_chains(chains, cfg.k, &mut diag, |c| Ok(parameterize(c)));
    timings.insert(Stage::Fit, ms_since(t));
    Ok(FrameResult {
        width: mask.width(),
        height: mask.height(),
        instances,
        chains,
        elapsed_ms: ms_since(start),
        stage_timings: timings,
        diagnostics: diag,
    })
}

/// As [`track_frame`], lifting every chain to 3D with the aligned depth map
/// before fitting. Chains without any valid depth are fitted in 2D and
/// listed in `diagnostics.fallback_2d`.
pub fn track_frame_3d(mask: &BinaryMask, depth: &DepthMap, cfg: &TrackerConfig) -> Result<FrameResult> {
    if (mask.width(), mask.height()) != (depth.width(), depth.height()) {
        return Err(Error::DimensionMismatch {
            mask_w: mask.width(),
            mask_h: mask.height(),
            depth_w: depth.width(),
            depth_h: depth.height(),
        });
    }
    cfg.validate()?;
    let start = Instant::now();
    let mut timings = BTreeMap::new();
    let mut diag = Diagnostics::default();
    let chains = chains_for(mask, cfg, &mut timings, &mut diag);
    let t = Instant::now();
    let (instances, chains) = fit_chains(chains, cfg.k, &mut diag, |c| lift_to_3d(c, depth));
    timings.insert(Stage::Fit, ms_since(t));
    Ok(FrameResult {
        width: mask.width(),
        height: mask.height(),
        instances,
        chains,
        elapsed_ms: ms_since(start),
        stage_timings: timings,
        diagnostics: diag,
    })
}

/// Pairs instances of consecutive frames by smallest L3 between their
/// sampled curves (greedy, one-to-one). This is an extension on top of the
/// stateless tracker; it carries no motion model.
pub fn associate_instances(
    previous: &[BSplineCurve],
    current: &[BSplineCurve],
    samples: usize,
) -> Result<InstanceMatching> {
    let disc = |cs: &[BSplineCurve]| -> Result<Vec<DiscretizedCurve>> {
        cs.iter().map(|c| DiscretizedCurve::from_curve(c, samples)).collect()
    };
    Ok(match_instances(&disc(current)?, &disc(previous)?))
}
