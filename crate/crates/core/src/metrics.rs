//! Evaluation measures.
//!
//! * `MMD(X, Y)`: mean over `X` of the distance to the nearest point of `Y`.
//!   `L1 = MMD(mask, curve)` measures coverage, `L2 = MMD(curve, mask)`
//!   precision.
//! * `L3(A, B) = (F(A, B) + F(B, A)) / 2`, where `F(X, Y)` averages, over the
//!   points of `X`, the distance to the segment of `Y` found at the same
//!   normalized arc length.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::mask_io::BinaryMask;
use crate::spline::BSplineCurve;

pub const DEFAULT_SAMPLES: usize = 512;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Exact nearest-neighbor lookup over 2D points bucketed into square cells.
pub struct NearestGrid<'a> {
    points: &'a [Vec<f64>],
    cell: f64,
    origin: [f64; 2],
    cols: i64,
    rows: i64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> NearestGrid<'a> {
    /// # Panics
    /// If `points` is empty.
    #[must_use]
    pub fn new(points: &'a [Vec<f64>], cell: f64) -> Self {
        assert!(!points.is_empty(), "empty point set");
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in points {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        let cols = ((hi[0] - lo[0]) / cell).floor() as i64 + 1;
        let rows = ((hi[1] - lo[1]) / cell).floor() as i64 + 1;
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            let key = (
                ((p[0] - lo[0]) / cell).floor() as i64,
                ((p[1] - lo[1]) / cell).floor() as i64,
            );
            buckets.entry(key).or_default().push(i);
        }
        Self {
            points,
            cell,
            origin: lo,
            cols,
            rows,
            buckets,
        }
    }

    /// Distance from `q` to the nearest indexed point.
    #[must_use]
    pub fn nearest_distance(&self, q: &[f64]) -> f64 {
        let cx = (((q[0] - self.origin[0]) / self.cell).floor() as i64).clamp(0, self.cols - 1);
        let cy = (((q[1] - self.origin[1]) / self.cell).floor() as i64).clamp(0, self.rows - 1);
        let mut best = f64::INFINITY;
        let max_ring = self.cols.max(self.rows);
        for r in 0..=max_ring {
            let mut visit = |x: i64, y: i64| {
                if let Some(ids) = self.buckets.get(&(x, y)) {
                    for &i in ids {
                        best = best.min(dist(q, &self.points[i]));
                    }
                }
            };
            if r == 0 {
                visit(cx, cy);
            } else {
                for x in cx - r..=cx + r {
                    visit(x, cy - r);
                    visit(x, cy + r);
                }
                for y in cy - r + 1..cy + r {
                    visit(cx - r, y);
                    visit(cx + r, y);
                }
            }
            // anything in ring r+1 or beyond is at least r cells away
            if best <= r as f64 * self.cell {
                break;
            }
        }
        best
    }
}

/// Mean minimal distance from `x` to `y`.
pub fn mmd(x: &[Vec<f64>], y: &[Vec<f64>]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let total: f64 = if y[0].len() == 2 && y.len() > 64 {
        let grid = NearestGrid::new(y, 4.0);
        x.iter().map(|p| grid.nearest_distance(p)).sum()
    } else {
        x.iter()
            .map(|p| y.iter().map(|q| dist(p, q)).fold(f64::INFINITY, f64::min))
            .sum()
    };
    Ok(total / x.len() as f64)
}

/// `(L1, L2)` between a mask and the union of `samples` points per curve
/// (2D projection).
pub fn l1_l2(mask: &BinaryMask, curves: &[BSplineCurve], samples: usize) -> Result<(f64, f64)> {
    let mask_pts: Vec<Vec<f64>> = mask.pixels().iter().map(|p| p.to_f64().to_vec()).collect();
    let curve_pts: Vec<Vec<f64>> = curves
        .iter()
        .flat_map(|c| c.sample(samples))
        .map(|p| p[..2].to_vec())
        .collect();
    Ok((mmd(&mask_pts, &curve_pts)?, mmd(&curve_pts, &mask_pts)?))
}

/// Polyline with its normalized cumulative arc length.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedCurve {
    points: Vec<Vec<f64>>,
    cum_norm_dist: Vec<f64>,
}

impl DiscretizedCurve {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::DegenerateCurve);
        }
        let mut cum = Vec::with_capacity(points.len());
        let mut acc = 0.0;
        cum.push(0.0);
        for w in points.windows(2) {
            acc += dist(&w[0], &w[1]);
            cum.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::DegenerateCurve);
        }
        for c in &mut cum {
            *c /= acc;
        }
        let last = cum.len() - 1;
        cum[last] = 1.0;
        Ok(Self {
            points,
            cum_norm_dist: cum,
        })
    }

    /// `samples` points at uniform parameter spacing.
    pub fn from_curve(curve: &BSplineCurve, samples: usize) -> Result<Self> {
        Self::new(curve.sample(samples))
    }

    #[must_use]
    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    #[must_use]
    pub fn cum_norm_dist(&self) -> &[f64] {
        &self.cum_norm_dist
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.points.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[must_use]
    pub fn reversed(&self) -> Self {
        let mut pts = self.points.clone();
        pts.reverse();
        Self::new(pts).expect("reversal keeps the length")
    }

    /// Drops coordinates beyond the first `dim`.
    pub fn project(&self, dim: usize) -> Result<Self> {
        Self::new(self.points.iter().map(|p| p[..dim].to_vec()).collect())
    }
}

/// Distance from `p` to the segment `a`–`b`.
#[must_use]
pub fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut ab2 = 0.0;
    let mut ap_ab = 0.0;
    for d in 0..p.len() {
        let ab = b[d] - a[d];
        ab2 += ab * ab;
        ap_ab += (p[d] - a[d]) * ab;
    }
    let w = if ab2 > 0.0 { (ap_ab / ab2).clamp(0.0, 1.0) } else { 0.0 };
    let mut s = 0.0;
    for d in 0..p.len() {
        let q = a[d] + w * (b[d] - a[d]);
        s += (p[d] - q) * (p[d] - q);
    }
    s.sqrt()
}

/// Index `k` of the segment of `y` covering normalized arc length `d`:
/// the smallest `k` with `D(k) <= d <= D(k+1)`.
fn aligned_segment(y: &DiscretizedCurve, d: f64) -> usize {
    let cum = y.cum_norm_dist();
    cum[1..].partition_point(|&v| v < d).min(cum.len() - 2)
}

/// Directed aligned mean distance `F(x, y)`.
#[must_use]
pub fn aligned_mean_distance(x: &DiscretizedCurve, y: &DiscretizedCurve) -> f64 {
    let total: f64 = x
        .points()
        .iter()
        .zip(x.cum_norm_dist())
        .map(|(p, &d)| {
            let k = aligned_segment(y, d);
            point_segment_distance(p, &y.points()[k], &y.points()[k + 1])
        })
        .sum();
    total / x.len() as f64
}

/// Symmetric L3 measure; sensitive to the orientation of the two curves.
#[must_use]
pub fn l3(a: &DiscretizedCurve, b: &DiscretizedCurve) -> f64 {
    0.5 * (aligned_mean_distance(a, b) + aligned_mean_distance(b, a))
}

/// L3 minimized over the two relative orientations.
#[must_use]
pub fn l3_unoriented(a: &DiscretizedCurve, b: &DiscretizedCurve) -> f64 {
    l3(a, b).min(l3(a, &b.reversed()))
}

/// Greedy one-to-one pairing of predicted and reference curves by
/// increasing orientation-free L3.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceMatching {
    /// `(predicted index, reference index, L3)` in commit order.
    pub pairs: Vec<(usize, usize, f64)>,
    /// References left without a prediction.
    pub missing: usize,
    /// Predictions left without a reference.
    pub redundant: usize,
}

impl InstanceMatching {
    #[must_use]
    pub fn mean_l3(&self) -> Option<f64> {
        (!self.pairs.is_empty())
            .then(|| self.pairs.iter().map(|p| p.2).sum::<f64>() / self.pairs.len() as f64)
    }
}

#[must_use]
pub fn match_instances(predicted: &[DiscretizedCurve], reference: &[DiscretizedCurve]) -> InstanceMatching {
    let mut cand: Vec<(f64, usize, usize)> = Vec::new();
    for (i, p) in predicted.iter().enumerate() {
        for (j, r) in reference.iter().enumerate() {
            cand.push((l3_unoriented(p, r), i, j));
        }
    }
    cand.sort_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    let mut used_p = vec![false; predicted.len()];
    let mut used_r = vec![false; reference.len()];
    let mut pairs = Vec::new();
    for (v, i, j) in cand {
        if used_p[i] || used_r[j] {
            continue;
        }
        used_p[i] = true;
        used_r[j] = true;
        pairs.push((i, j, v));
    }
    InstanceMatching {
        missing: reference.len() - pairs.len(),
        redundant: predicted.len() - pairs.len(),
        pairs,
    }
}

/// Mean and population standard deviation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    #[must_use]
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        Some(Self {
            count: values.len(),
            mean,
            std: var.sqrt(),
        })
    }
}
