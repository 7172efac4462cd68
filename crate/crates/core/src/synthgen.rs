//! Synthetic scenes: reference curves evolving over time, rasterized to
//! masks (and optionally depth) with known ground truth.
//!
//! Each cable is a clamped uniform cubic B-spline over a control polygon.
//! The polygon either follows scripted keyframes or a seeded, bounded random
//! walk. Masks are drawn by stamping disks along densely sampled curve
//! points, then occlusion rectangles are cut out.

use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mask_io::{BinaryMask, DepthMap};
use crate::metrics::{match_instances, DiscretizedCurve, Summary, DEFAULT_SAMPLES};
use crate::pixel::Pixel;
use crate::spline::BSplineCurve;
use crate::tracker::{track_frame, track_frame_3d, TrackerConfig};

/// Control polygon: 2D or 3D points.
pub type Polygon = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Motion {
    /// Polygons spread evenly over the sequence, linearly blended in between.
    Keyframes { keyframes: Vec<Polygon> },
    /// Smooth random walk of every control point. Per-frame displacement
    /// never exceeds `step`; points bounce off the band `margin` pixels
    /// inside the image border.
    RandomWalk {
        initial: Polygon,
        step: f64,
        #[serde(default = "default_margin")]
        margin: f64,
    },
}

fn default_margin() -> f64 {
    20.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CableSpec {
    pub motion: Motion,
}

/// Axis-aligned rectangle removed from the mask, optionally only for the
/// frames in `frames = [first, last]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occlusion {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
    #[serde(default)]
    pub frames: Option<[usize; 2]>,
}

impl Occlusion {
    fn active(&self, frame: usize) -> bool {
        self.frames.is_none_or(|[a, b]| (a..=b).contains(&frame))
    }

    fn covers(&self, x: f64, y: f64) -> bool {
        x >= self.x && x < self.x + self.width && y >= self.y && y < self.y + self.height
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DepthMode {
    #[default]
    None,
    Plane { z: f64 },
    /// Linear in the column index, `z0` at the left border and `z1` at the right.
    Ramp { z0: f64, z1: f64 },
    /// Depth of the nearest curve sample, taken from 3D control points.
    FromCurveZ,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub name: String,
    pub frames: usize,
    pub width: usize,
    pub height: usize,
    pub cable_width: f64,
    pub cables: Vec<CableSpec>,
    #[serde(default)]
    pub occlusions: Vec<Occlusion>,
    #[serde(default)]
    pub depth: DepthMode,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Scenario(m));
        if self.frames == 0 {
            return bad("frames must be positive".into());
        }
        if self.width < 3 || self.height < 3 {
            return bad(format!("image {}x{} is below 3x3", self.width, self.height));
        }
        if !(self.cable_width >= 3.0) {
            return bad(format!("cable width {} is below 3 px", self.cable_width));
        }
        if self.cables.is_empty() {
            return bad("no cables".into());
        }
        for (i, c) in self.cables.iter().enumerate() {
            let polys: Vec<&Polygon> = match &c.motion {
                Motion::Keyframes { keyframes } => keyframes.iter().collect(),
                Motion::RandomWalk { initial, step, .. } => {
                    if !(*step >= 0.0) {
                        return bad(format!("cable {i}: negative step"));
                    }
                    vec![initial]
                }
            };
            if polys.is_empty() {
                return bad(format!("cable {i}: no keyframes"));
            }
            let n = polys[0].len();
            let dim = polys[0].first().map_or(0, Vec::len);
            if n < 4 {
                return bad(format!("cable {i}: {n} control points, need 4"));
            }
            if !(dim == 2 || dim == 3) {
                return bad(format!("cable {i}: control points must be 2D or 3D"));
            }
            if polys.iter().any(|p| p.len() != n || p.iter().any(|q| q.len() != dim)) {
                return bad(format!("cable {i}: keyframes differ in shape"));
            }
            if self.depth == DepthMode::FromCurveZ && dim != 3 {
                return bad(format!("cable {i}: from_curve_z depth needs 3D control points"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)
            .map_err(|e| Error::Scenario(format!("cannot parse scenario: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }
}

fn cable_seed(seed: u64, cable: usize) -> u64 {
    seed ^ (cable as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Control polygon of every frame for one cable.
pub fn evolve(motion: &Motion, frames: usize, width: usize, height: usize, seed: u64) -> Vec<Polygon> {
    match motion {
        Motion::Keyframes { keyframes } => (0..frames)
            .map(|f| {
                if keyframes.len() == 1 || frames == 1 {
                    return keyframes[0].clone();
                }
                let s = f as f64 * (keyframes.len() - 1) as f64 / (frames - 1) as f64;
                let i = (s.floor() as usize).min(keyframes.len() - 2);
                let u = s - i as f64;
                keyframes[i]
                    .iter()
                    .zip(&keyframes[i + 1])
                    .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + u * (y - x)).collect())
                    .collect()
            })
            .collect(),
        Motion::RandomWalk {
            initial,
            step,
            margin,
        } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut poly = initial.clone();
            let mut vel = vec![[0.0f64; 2]; poly.len()];
            let lo = [*margin, *margin];
            let hi = [width as f64 - 1.0 - margin, height as f64 - 1.0 - margin];
            let mut out = Vec::with_capacity(frames);
            out.push(poly.clone());
            for _ in 1..frames {
                for (p, v) in poly.iter_mut().zip(&mut vel) {
                    // random direction in the unit disk
                    let (a, r): (f64, f64) = (rng.random_range(0.0..std::f64::consts::TAU), rng.random());
                    let kick = [r.sqrt() * a.cos(), r.sqrt() * a.sin()];
                    for d in 0..2 {
                        v[d] = 0.7 * v[d] + 0.3 * step * kick[d];
                    }
                    let speed = v[0].hypot(v[1]);
                    if speed > *step {
                        let s = if speed > 0.0 { step / speed } else { 0.0 };
                        v[0] *= s;
                        v[1] *= s;
                    }
                    for d in 0..2 {
                        let mut x = p[d] + v[d];
                        if x < lo[d] {
                            x = (2.0 * lo[d] - x).min(hi[d]);
                            v[d] = -v[d];
                        } else if x > hi[d] {
                            x = (2.0 * hi[d] - x).max(lo[d]);
                            v[d] = -v[d];
                        }
                        p[d] = x;
                    }
                }
                out.push(poly.clone());
            }
            out
        }
    }
}

/// Parameter-uniform samples spaced at most `spacing` apart along the curve.
fn dense_samples(curve: &BSplineCurve, spacing: f64) -> Vec<Vec<f64>> {
    // |C'(u)| <= degree * max|ΔP| / knot spacing on a uniform clamped knot vector
    let n = curve.control_count();
    let max_edge = (1..n)
        .map(|i| {
            let (a, b) = (curve.control_point(i - 1), curve.control_point(i));
            ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
        })
        .fold(0.0, f64::max);
    let speed = 3.0 * max_edge * (n - 3) as f64;
    let count = ((speed / spacing).ceil() as usize).max(2) + 1;
    curve.sample(count)
}

/// One rendered frame.
#[derive(Debug, Clone)]
pub struct RenderedFrame {
    pub mask: BinaryMask,
    pub depth: Option<DepthMap>,
    /// Reference curve per cable, 3D when the scenario renders depth.
    pub truth: Vec<DiscretizedCurve>,
}

/// Precomputed control polygons for a whole sequence.
#[derive(Debug, Clone)]
pub struct Scenario {
    spec: ScenarioSpec,
    /// `polygons[cable][frame]`
    polygons: Vec<Vec<Polygon>>,
}

impl Scenario {
    pub fn new(spec: ScenarioSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let polygons = spec
            .cables
            .iter()
            .enumerate()
            .map(|(i, c)| evolve(&c.motion, spec.frames, spec.width, spec.height, cable_seed(seed, i)))
            .collect();
        Ok(Self { spec, polygons })
    }

    #[must_use]
    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    #[must_use]
    pub fn frames(&self) -> usize {
        self.spec.frames
    }

    #[must_use]
    pub fn polygon(&self, cable: usize, frame: usize) -> &Polygon {
        &self.polygons[cable][frame]
    }

    /// Depth of the analytic surface; plane and ramp vary only along x.
    fn depth_at(&self, x: f64) -> Option<f64> {
        match self.spec.depth {
            DepthMode::None | DepthMode::FromCurveZ => None,
            DepthMode::Plane { z } => Some(z),
            DepthMode::Ramp { z0, z1 } => {
                Some(z0 + (z1 - z0) * x / (self.spec.width as f64 - 1.0).max(1.0))
            }
        }
    }

    pub fn render(&self, frame: usize) -> Result<RenderedFrame> {
        let spec = &self.spec;
        if frame >= spec.frames {
            return Err(Error::Scenario(format!(
                "frame {frame} out of range ({} frames)",
                spec.frames
            )));
        }
        let (w, h) = (spec.width, spec.height);
        let r = spec.cable_width / 2.0;
        let reach = r.ceil() as i32;
        let mut mask = BinaryMask::empty(w, h)?;
        // squared distance to the nearest stamp and that stamp's z, per pixel
        let mut nearest = vec![(f64::INFINITY, 0.0f64); w * h];
        let mut truth = Vec::with_capacity(spec.cables.len());
        for cable in 0..spec.cables.len() {
            let curve = BSplineCurve::clamped_uniform(self.polygon(cable, frame))?;
            for s in dense_samples(&curve, 0.4) {
                let (cx, cy) = (s[0], s[1]);
                let z = s.get(2).copied().unwrap_or(0.0);
                let (ix, iy) = (cx.round() as i32, cy.round() as i32);
                for py in iy - reach..=iy + reach {
                    for px in ix - reach..=ix + reach {
                        let p = Pixel::new(px, py);
                        if !mask.in_bounds(p) {
                            continue;
                        }
                        let d2 = (f64::from(px) - cx).powi(2) + (f64::from(py) - cy).powi(2);
                        if d2 <= r * r {
                            mask.set(p, true);
                            let slot = &mut nearest[py as usize * w + px as usize];
                            if d2 < slot.0 {
                                *slot = (d2, z);
                            }
                        }
                    }
                }
            }
            let gt: Vec<Vec<f64>> = dense_samples(&curve, 1.0)
                .into_iter()
                .map(|p| match spec.depth {
                    DepthMode::None => p[..2].to_vec(),
                    DepthMode::FromCurveZ => p,
                    _ => vec![p[0], p[1], self.depth_at(p[0]).expect("depth mode")],
                })
                .collect();
            truth.push(DiscretizedCurve::new(gt)?);
        }
        for occ in spec.occlusions.iter().filter(|o| o.active(frame)) {
            for p in mask.pixels() {
                if occ.covers(f64::from(p.x), f64::from(p.y)) {
                    mask.set(p, false);
                }
            }
        }
        let depth = match spec.depth {
            DepthMode::None => None,
            DepthMode::FromCurveZ => {
                let raw = (0..w * h)
                    .map(|i| {
                        let p = Pixel::new((i % w) as i32, (i / w) as i32);
                        if mask.get(p) {
                            nearest[i].1 as f32
                        } else {
                            0.0
                        }
                    })
                    .collect();
                Some(DepthMap::from_raw(w, h, raw)?)
            }
            _ => {
                let raw = (0..w * h)
                    .map(|i| {
                        let x = (i % w) as f64;
                        self.depth_at(x).expect("depth mode") as f32
                    })
                    .collect();
                Some(DepthMap::from_raw(w, h, raw)?)
            }
        };
        Ok(RenderedFrame { mask, depth, truth })
    }
}

/// Renders a single frame of `spec`; identical inputs give identical outputs.
pub fn render_frame(spec: &ScenarioSpec, frame_index: usize, seed: u64) -> Result<RenderedFrame> {
    Scenario::new(spec.clone(), seed)?.render(frame_index)
}

/// Ground-truth file written next to a rendered sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthDocument {
    pub scenario: String,
    pub seed: u64,
    pub frames: Vec<GroundTruthFrame>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthFrame {
    pub index: usize,
    pub mask: String,
    #[serde(default)]
    pub depth: Option<String>,
    /// One polyline per cable.
    pub curves: Vec<Vec<Vec<f64>>>,
}

impl GroundTruthDocument {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn curves(&self, frame: usize) -> Result<Vec<DiscretizedCurve>> {
        self.frames[frame]
            .curves
            .iter()
            .map(|c| DiscretizedCurve::new(c.clone()))
            .collect()
    }
}

/// Writes `mask_NNNN.png` (plus `depth_NNNN.png` when depth is rendered)
/// for every frame and a `ground_truth.json`; returns the ground-truth path.
pub fn write_sequence(spec: &ScenarioSpec, seed: u64, out_dir: &Path) -> Result<PathBuf> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;
    let scenario = Scenario::new(spec.clone(), seed)?;
    let mut frames = Vec::with_capacity(spec.frames);
    for f in 0..spec.frames {
        let rendered = scenario.render(f)?;
        let mask_name = format!("mask_{f:04}.png");
        rendered.mask.save_png(&out_dir.join(&mask_name))?;
        let depth_name = match &rendered.depth {
            Some(d) => {
                let name = format!("depth_{f:04}.png");
                d.save_png(&out_dir.join(&name))?;
                Some(name)
            }
            None => None,
        };
        frames.push(GroundTruthFrame {
            index: f,
            mask: mask_name,
            depth: depth_name,
            curves: rendered.truth.iter().map(|c| c.points().to_vec()).collect(),
        });
    }
    let doc = GroundTruthDocument {
        scenario: spec.name.clone(),
        seed,
        frames,
    };
    let path = out_dir.join("ground_truth.json");
    let text = serde_json::to_string(&doc).map_err(|source| Error::Json {
        path: path.clone(),
        source,
    })?;
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

/// Tracking quality on one rendered frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrameScore {
    pub frame: usize,
    pub instances: usize,
    /// Mean L3 over matched (prediction, ground truth) pairs; `None` if nothing matched.
    pub l3: Option<f64>,
    pub missing: usize,
    pub redundant: usize,
    pub elapsed_ms: f64,
}

/// Per-frame scores of a whole scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioScore {
    pub name: String,
    pub frames: Vec<FrameScore>,
}

impl ScenarioScore {
    /// Mean of the per-frame L3 values over frames where anything matched.
    #[must_use]
    pub fn mean_l3(&self) -> Option<f64> {
        let v: Vec<f64> = self.frames.iter().filter_map(|f| f.l3).collect();
        Summary::of(&v).map(|s| s.mean)
    }

    /// Fraction of frames with exactly `n` instances.
    #[must_use]
    pub fn fraction_with_instances(&self, n: usize) -> f64 {
        let hits = self.frames.iter().filter(|f| f.instances == n).count();
        hits as f64 / self.frames.len().max(1) as f64
    }
}

/// Renders every frame, tracks it (in 3D when the scenario has depth) and
/// scores the result against ground truth with orientation-free L3.
pub fn score_scenario(spec: &ScenarioSpec, seed: u64, cfg: &TrackerConfig) -> Result<ScenarioScore> {
    let scenario = Scenario::new(spec.clone(), seed)?;
    let mut frames = Vec::with_capacity(spec.frames);
    for f in 0..spec.frames {
        let rendered = scenario.render(f)?;
        let result = match &rendered.depth {
            Some(d) => track_frame_3d(&rendered.mask, d, cfg)?,
            None => track_frame(&rendered.mask, cfg)?,
        };
        let predicted = result
            .instances
            .iter()
            .map(|c| DiscretizedCurve::from_curve(c, DEFAULT_SAMPLES))
            .collect::<Result<Vec<_>>>()?;
        let m = match_instances(&predicted, &rendered.truth);
        frames.push(FrameScore {
            frame: f,
            instances: result.instances.len(),
            l3: m.mean_l3(),
            missing: m.missing,
            redundant: m.redundant,
            elapsed_ms: result.elapsed_ms,
        });
    }
    Ok(ScenarioScore {
        name: spec.name.clone(),
        frames,
    })
}

/// Ready-made scenarios covering the usual failure modes: plain motion,
/// tight bends, a self-crossing loop, an occluded span and two cables.
pub mod presets {
    use super::*;

    pub const NAMES: [&str; 7] = [
        "plain",
        "high_curvature",
        "self_intersection",
        "occlusion",
        "two_cables",
        "helix_3d",
        "hd",
    ];

    fn pts(v: &[(f64, f64)]) -> Polygon {
        v.iter().map(|&(x, y)| vec![x, y]).collect()
    }

    fn shifted(p: &Polygon, dx: f64, dy: f64) -> Polygon {
        p.iter().map(|q| vec![q[0] + dx, q[1] + dy]).collect()
    }

    fn base(name: &str, cables: Vec<CableSpec>) -> ScenarioSpec {
        ScenarioSpec {
            name: name.into(),
            frames: 50,
            width: 640,
            height: 480,
            cable_width: 5.0,
            cables,
            occlusions: Vec::new(),
            depth: DepthMode::None,
        }
    }

    fn gentle_s() -> Polygon {
        pts(&[
            (80.0, 240.0),
            (180.0, 170.0),
            (280.0, 200.0),
            (360.0, 290.0),
            (460.0, 310.0),
            (560.0, 240.0),
        ])
    }

    #[must_use]
    pub fn plain() -> ScenarioSpec {
        base(
            "plain",
            vec![CableSpec {
                motion: Motion::RandomWalk {
                    initial: gentle_s(),
                    step: 1.0,
                    margin: 40.0,
                },
            }],
        )
    }

    #[must_use]
    pub fn high_curvature() -> ScenarioSpec {
        let serpentine = pts(&[
            (90.0, 110.0),
            (520.0, 100.0),
            (560.0, 160.0),
            (520.0, 215.0),
            (130.0, 215.0),
            (90.0, 275.0),
            (130.0, 330.0),
            (540.0, 340.0),
        ]);
        base(
            "high_curvature",
            vec![CableSpec {
                motion: Motion::Keyframes {
                    keyframes: vec![serpentine.clone(), shifted(&serpentine, 20.0, 40.0)],
                },
            }],
        )
    }

    /// Open curve with one loop whose ends cross near the middle of the image.
    #[must_use]
    pub fn self_intersection() -> ScenarioSpec {
        // prolate trochoid: x = a·u − b·sin u, y = c − b·cos u loops where b > a
        let loop_poly = |a: f64, b: f64, cx: f64| -> Polygon {
            (0..25)
                .map(|i| {
                    let u = -1.15 * std::f64::consts::PI + 2.3 * std::f64::consts::PI * f64::from(i) / 24.0;
                    vec![cx + a * u - b * u.sin(), 200.0 + b * u.cos()]
                })
                .collect()
        };
        base(
            "self_intersection",
            vec![CableSpec {
                motion: Motion::Keyframes {
                    keyframes: vec![loop_poly(55.0, 110.0, 320.0), loop_poly(60.0, 105.0, 335.0)],
                },
            }],
        )
    }

    #[must_use]
    pub fn occlusion() -> ScenarioSpec {
        let mut spec = base(
            "occlusion",
            vec![CableSpec {
                motion: Motion::RandomWalk {
                    initial: gentle_s(),
                    step: 1.0,
                    margin: 40.0,
                },
            }],
        );
        spec.occlusions.push(Occlusion {
            x: 305.0,
            y: 0.0,
            width: 30.0,
            height: 480.0,
            frames: None,
        });
        spec
    }

    #[must_use]
    pub fn two_cables() -> ScenarioSpec {
        let upper = pts(&[
            (70.0, 110.0),
            (180.0, 70.0),
            (300.0, 120.0),
            (420.0, 90.0),
            (570.0, 120.0),
        ]);
        let lower = pts(&[
            (80.0, 360.0),
            (200.0, 400.0),
            (320.0, 350.0),
            (440.0, 400.0),
            (560.0, 370.0),
        ]);
        base(
            "two_cables",
            vec![
                CableSpec {
                    motion: Motion::Keyframes {
                        keyframes: vec![upper.clone(), shifted(&upper, 15.0, 10.0), upper.clone()],
                    },
                },
                CableSpec {
                    motion: Motion::Keyframes {
                        keyframes: vec![lower.clone(), shifted(&lower, -15.0, -10.0), lower],
                    },
                },
            ],
        )
    }

    /// A cable winding in depth, rendered with depth taken from the curve.
    #[must_use]
    pub fn helix_3d() -> ScenarioSpec {
        let helix: Polygon = (0..12)
            .map(|i| {
                let s = f64::from(i) / 11.0;
                let a = 3.0 * std::f64::consts::PI * s;
                vec![100.0 + 440.0 * s, 240.0 + 110.0 * a.sin(), 650.0 + 150.0 * a.cos()]
            })
            .collect();
        let mut spec = base(
            "helix_3d",
            vec![CableSpec {
                motion: Motion::Keyframes {
                    keyframes: vec![helix],
                },
            }],
        );
        spec.frames = 10;
        spec.depth = DepthMode::FromCurveZ;
        spec
    }

    /// Single 1280×720 frame for latency measurements.
    #[must_use]
    pub fn hd() -> ScenarioSpec {
        ScenarioSpec {
            name: "hd".into(),
            frames: 1,
            width: 1280,
            height: 720,
            cable_width: 5.0,
            cables: vec![CableSpec {
                motion: Motion::Keyframes {
                    keyframes: vec![pts(&[
                        (100.0, 360.0),
                        (300.0, 180.0),
                        (520.0, 260.0),
                        (700.0, 520.0),
                        (920.0, 560.0),
                        (1180.0, 330.0),
                    ])],
                },
            }],
            occlusions: Vec::new(),
            depth: DepthMode::None,
        }
    }

    #[must_use]
    pub fn by_name(name: &str) -> Option<ScenarioSpec> {
        Some(match name {
            "plain" => plain(),
            "high_curvature" => high_curvature(),
            "self_intersection" => self_intersection(),
            "occlusion" => occlusion(),
            "two_cables" => two_cables(),
            "helix_3d" => helix_3d(),
            "hd" => hd(),
            _ => return None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::skeleton::{morphological_open, skeletonize};
    use crate::pixel::PixelSet;

    fn straight(width: f64) -> ScenarioSpec {
        ScenarioSpec {
            name: "straight".into(),
            frames: 3,
            width: 200,
            height: 60,
            cable_width: width,
            cables: vec![CableSpec {
                motion: Motion::Keyframes {
                    keyframes: vec![(0..5)
                        .map(|i| vec![20.0 + 40.0 * f64::from(i), 30.0])
                        .collect()],
                },
            }],
            occlusions: Vec::new(),
            depth: DepthMode::None,
        }
    }

    #[test]
    fn straight_cable_is_a_five_pixel_ribbon() {
        let f = render_frame(&straight(5.0), 0, 1).unwrap();
        for x in 30..170 {
            let col: Vec<i32> = (0..60).filter(|&y| f.mask.get(Pixel::new(x, y))).collect();
            assert_eq!(col, vec![28, 29, 30, 31, 32], "column {x}");
        }
        for p in f.truth[0].points() {
            assert!((p[1] - 30.0).abs() < 1e-9);
        }
    }

    #[test]
    fn occlusion_cuts_a_hole() {
        let mut spec = straight(5.0);
        spec.occlusions.push(Occlusion {
            x: 85.0,
            y: 0.0,
            width: 30.0,
            height: 60.0,
            frames: None,
        });
        let plain = render_frame(&straight(5.0), 0, 1).unwrap();
        let f = render_frame(&spec, 0, 1).unwrap();
        for x in 85..115 {
            assert!((0..60).all(|y| !f.mask.get(Pixel::new(x, y))));
        }
        assert!(f.mask.get(Pixel::new(84, 30)) && f.mask.get(Pixel::new(115, 30)));
        assert_eq!(f.truth, plain.truth);
    }

    #[test]
    fn occlusion_frame_window() {
        let mut spec = straight(5.0);
        spec.occlusions.push(Occlusion {
            x: 85.0,
            y: 0.0,
            width: 30.0,
            height: 60.0,
            frames: Some([1, 1]),
        });
        let s = Scenario::new(spec, 0).unwrap();
        assert!(s.render(0).unwrap().mask.get(Pixel::new(100, 30)));
        assert!(!s.render(1).unwrap().mask.get(Pixel::new(100, 30)));
        assert!(s.render(3).is_err());
    }

    #[test]
    fn self_intersection_produces_a_branch_point() {
        let f = render_frame(&presets::self_intersection(), 0, 5).unwrap();
        let sk = skeletonize(&morphological_open(&f.mask, 3));
        let set = PixelSet::new(&sk);
        assert!(sk.iter().any(|&p| set.neighbor_count(p) > 2));
    }

    #[test]
    fn rendering_is_deterministic() {
        for name in presets::NAMES {
            let spec = presets::by_name(name).unwrap();
            let a = render_frame(&spec, 0, 42).unwrap();
            let b = render_frame(&spec, 0, 42).unwrap();
            assert_eq!(a.mask, b.mask, "{name}");
            assert_eq!(a.depth, b.depth, "{name}");
            assert_eq!(a.truth, b.truth, "{name}");
        }
    }

    #[test]
    fn mask_contains_the_thinned_cable() {
        let spec = presets::plain();
        let f = render_frame(&spec, 7, 3).unwrap();
        let r = spec.cable_width / 2.0 - 1.0;
        for p in f.truth[0].points() {
            for dy in -1..=1 {
                for dx in -1..=1 {
                    let (x, y) = (p[0] + f64::from(dx) * r, p[1] + f64::from(dy) * r);
                    let q = Pixel::new(x.round() as i32, y.round() as i32);
                    if (f64::from(q.x) - p[0]).hypot(f64::from(q.y) - p[1]) <= r {
                        assert!(f.mask.get(q), "{q:?} near {p:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn zero_step_is_static() {
        let m = Motion::RandomWalk {
            initial: straight(5.0).cables[0].motion.clone().keyframes0(),
            step: 0.0,
            margin: 5.0,
        };
        let seq = evolve(&m, 10, 200, 60, 9);
        assert!(seq.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn random_walk_is_seeded_and_bounded() {
        let m = Motion::RandomWalk {
            initial: presets::plain().cables[0].motion.clone().keyframes0(),
            step: 5.0,
            margin: 20.0,
        };
        let a = evolve(&m, 100, 640, 480, 17);
        assert_eq!(a, evolve(&m, 100, 640, 480, 17));
        assert_ne!(a, evolve(&m, 100, 640, 480, 18));
        for w in a.windows(2) {
            for (p, q) in w[0].iter().zip(&w[1]) {
                assert!((p[0] - q[0]).hypot(p[1] - q[1]) <= 5.0 + 1e-9);
                assert!(q[0] >= 20.0 && q[0] <= 619.0 && q[1] >= 20.0 && q[1] <= 459.0);
            }
        }
    }

    #[test]
    fn depth_modes() {
        let mut spec = straight(5.0);
        spec.depth = DepthMode::Ramp { z0: 100.0, z1: 299.0 };
        let f = render_frame(&spec, 0, 0).unwrap();
        let d = f.depth.unwrap();
        assert_eq!(d.get(Pixel::new(0, 0)), Some(100.0));
        assert_eq!(d.get(Pixel::new(199, 0)), Some(299.0));
        assert_eq!(f.truth[0].points()[0].len(), 3);

        let h = render_frame(&presets::helix_3d(), 0, 0).unwrap();
        let d = h.depth.unwrap();
        let on = h.mask.pixels()[0];
        assert!(d.is_valid(on));
        assert!(!d.is_valid(Pixel::new(0, 0)));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut s = straight(2.0);
        assert!(s.validate().is_err());
        s = straight(5.0);
        s.frames = 0;
        assert!(s.validate().is_err());
        s = straight(5.0);
        s.depth = DepthMode::FromCurveZ;
        assert!(s.validate().is_err());
        assert!(ScenarioSpec::from_json("{").is_err());
    }

    #[test]
    fn spec_json_roundtrip() {
        for name in presets::NAMES {
            let spec = presets::by_name(name).unwrap();
            let text = serde_json::to_string(&spec).unwrap();
            assert_eq!(ScenarioSpec::from_json(&text).unwrap(), spec);
        }
    }

    impl Motion {
        fn keyframes0(self) -> Polygon {
            match self {
                Motion::Keyframes { keyframes } => keyframes[0].clone(),
                Motion::RandomWalk { initial, .. } => initial,
            }
        }
    }
}
