//! Cubic B-spline fitting of ordered chains.
//!
//! The argument vector `t` is the cumulative arc length along the chain,
//! counting 1 or √2 per pixel step and the straight-line gap between
//! consecutive segments. Interior knots sit at `k` index-equidistant entries
//! of `t`, end knots are clamped, and control points come from a linear
//! least-squares fit solved with Givens rotations on the banded collocation
//! matrix (each row has at most four nonzeros).

use crate::chainer::SegmentChain;
use crate::error::{Error, Result};
use crate::mask_io::{CurveInstance, DepthMap};
use crate::walker::step_length;

pub const DEGREE: usize = 3;
const ORDER: usize = DEGREE + 1;

/// Clamped cubic B-spline in 2D or 3D.
#[derive(Debug, Clone, PartialEq)]
pub struct BSplineCurve {
    knots: Vec<f64>,
    dim: usize,
    /// Control points, flattened: point `i` is `coeffs[i*dim..(i+1)*dim]`.
    coeffs: Vec<f64>,
}

impl BSplineCurve {
    pub fn new(knots: Vec<f64>, control_points: &[Vec<f64>]) -> Result<Self> {
        let dim = control_points.first().map_or(0, Vec::len);
        let coeffs = control_points.iter().flatten().copied().collect();
        let curve = Self { knots, dim, coeffs };
        curve.to_instance().validate()?;
        Ok(curve)
    }

    /// Clamped uniform cubic through the given control polygon, on `[0, 1]`.
    pub fn clamped_uniform(control_points: &[Vec<f64>]) -> Result<Self> {
        let n = control_points.len();
        if n < ORDER {
            return Err(Error::Curve(format!("{n} control points, need at least {ORDER}")));
        }
        let interior = n - ORDER;
        let mut knots = vec![0.0; ORDER];
        knots.extend((1..=interior).map(|j| j as f64 / (interior + 1) as f64));
        knots.extend([1.0; ORDER]);
        Self::new(knots, control_points)
    }

    pub fn from_instance(inst: &CurveInstance) -> Result<Self> {
        inst.validate()?;
        Self::new(inst.knots.clone(), &inst.control_points)
    }

    #[must_use]
    pub fn to_instance(&self) -> CurveInstance {
        CurveInstance {
            degree: DEGREE,
            knots: self.knots.clone(),
            control_points: self.control_points(),
            t_range: self.t_range(),
        }
    }

    #[must_use]
    pub fn degree(&self) -> usize {
        DEGREE
    }

    #[must_use]
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[must_use]
    pub fn control_count(&self) -> usize {
        self.coeffs.len() / self.dim.max(1)
    }

    #[must_use]
    pub fn control_point(&self, i: usize) -> &[f64] {
        &self.coeffs[i * self.dim..(i + 1) * self.dim]
    }

    #[must_use]
    pub fn control_points(&self) -> Vec<Vec<f64>> {
        self.coeffs.chunks_exact(self.dim).map(<[f64]>::to_vec).collect()
    }

    #[must_use]
    pub fn t_range(&self) -> [f64; 2] {
        [self.knots[0], self.knots[self.knots.len() - 1]]
    }

    /// Point at parameter `t` by de Boor's algorithm.
    pub fn evaluate(&self, t: f64) -> Result<Vec<f64>> {
        let [lo, hi] = self.t_range();
        if !(lo..=hi).contains(&t) {
            return Err(Error::OutOfRange { t, min: lo, max: hi });
        }
        let span = find_span(&self.knots, self.control_count(), t);
        let mut d = [[0.0f64; 3]; ORDER];
        for (j, dj) in d.iter_mut().enumerate() {
            dj[..self.dim].copy_from_slice(self.control_point(span - DEGREE + j));
        }
        for r in 1..=DEGREE {
            for j in (r..=DEGREE).rev() {
                let left = self.knots[j + span - DEGREE];
                let right = self.knots[j + 1 + span - r];
                let alpha = if right > left { (t - left) / (right - left) } else { 0.0 };
                let (lo, hi) = d.split_at_mut(j);
                for (cur, prev) in hi[0][..self.dim].iter_mut().zip(&lo[j - 1]) {
                    *cur = (1.0 - alpha) * prev + alpha * *cur;
                }
            }
        }
        Ok(d[DEGREE][..self.dim].to_vec())
    }

    /// `n` points at uniformly spaced parameters across `t_range`, ends included.
    #[must_use]
    pub fn sample(&self, n: usize) -> Vec<Vec<f64>> {
        let [lo, hi] = self.t_range();
        (0..n)
            .map(|i| {
                let t = if n <= 1 {
                    lo
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                };
                self.evaluate(t.clamp(lo, hi)).expect("t inside range")
            })
            .collect()
    }
}

/// Knot span index `s` with `knots[s] <= t < knots[s+1]`; the last
/// non-empty span for `t == t_max`.
fn find_span(knots: &[f64], n_ctrl: usize, t: f64) -> usize {
    if t >= knots[n_ctrl] {
        return n_ctrl - 1;
    }
    // first index in [DEGREE, n_ctrl) whose knot exceeds t, minus one
    let upper = knots[DEGREE + 1..=n_ctrl].partition_point(|&k| k <= t) + DEGREE + 1;
    upper - 1
}

/// The four nonzero basis values on `span` at `t`.
fn basis_functions(knots: &[f64], span: usize, t: f64) -> [f64; ORDER] {
    let mut n = [0.0; ORDER];
    let mut left = [0.0; ORDER];
    let mut right = [0.0; ORDER];
    n[0] = 1.0;
    for j in 1..=DEGREE {
        left[j] = t - knots[span + 1 - j];
        right[j] = knots[span + j] - t;
        let mut saved = 0.0;
        for r in 0..j {
            let denom = right[r + 1] + left[j - r];
            let temp = if denom == 0.0 { 0.0 } else { n[r] / denom };
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }
    n
}

/// Arc-length argument vector and the matching coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterizedChain {
    t: Vec<f64>,
    dim: usize,
    coords: Vec<f64>,
}

impl ParameterizedChain {
    /// Builds a chain from raw samples, dropping any sample whose parameter
    /// does not strictly exceed the previous kept one.
    pub fn new(t: &[f64], coords: &[Vec<f64>]) -> Result<Self> {
        if t.len() != coords.len() || t.is_empty() {
            return Err(Error::Curve(format!(
                "{} parameters for {} points",
                t.len(),
                coords.len()
            )));
        }
        let dim = coords[0].len();
        let mut out = Self {
            t: Vec::with_capacity(t.len()),
            dim,
            coords: Vec::with_capacity(t.len() * dim),
        };
        for (&ti, c) in t.iter().zip(coords) {
            if c.len() != dim {
                return Err(Error::Curve("mixed point dimensions".into()));
            }
            if out.t.last().is_some_and(|&last| ti <= last) {
                continue;
            }
            out.t.push(ti);
            out.coords.extend_from_slice(c);
        }
        Ok(out)
    }

    #[must_use]
    pub fn t(&self) -> &[f64] {
        &self.t
    }

    #[must_use]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.t.len()
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    #[must_use]
    pub fn coord(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    #[must_use]
    pub fn coords(&self) -> Vec<Vec<f64>> {
        self.coords.chunks_exact(self.dim).map(<[f64]>::to_vec).collect()
    }
}

/// Cumulative arc length along the chain, one entry per pixel.
#[must_use]
pub fn chain_arc_length(chain: &SegmentChain) -> Vec<f64> {
    let mut t = Vec::with_capacity(chain.point_count());
    let mut acc = 0.0;
    for (i, link) in chain.segments.iter().enumerate() {
        if i > 0 {
            acc += chain.gap_distances[i - 1];
        }
        let mut prev = None;
        for p in link.points() {
            if let Some(q) = prev {
                acc += step_length(q, p);
            }
            t.push(acc);
            prev = Some(p);
        }
    }
    t
}

/// 2D parameterization of a non-empty chain.
#[must_use]
pub fn parameterize(chain: &SegmentChain) -> ParameterizedChain {
    let t = chain_arc_length(chain);
    let coords: Vec<Vec<f64>> = chain
        .pixels()
        .into_iter()
        .map(|p| p.to_f64().to_vec())
        .collect();
    ParameterizedChain::new(&t, &coords).expect("chain is non-empty")
}

/// Clamped knot vector with `k` interior knots at
/// `t[round((j+1)(n-1)/(k+1))]`, `j = 0..k`.
pub fn place_knots(t: &[f64], k: usize) -> Result<Vec<f64>> {
    let n = t.len();
    if k < 1 || n < k + ORDER {
        return Err(Error::InsufficientData { points: n, knots: k });
    }
    let step = (n - 1) as f64 / (k + 1) as f64;
    let mut knots = Vec::with_capacity(k + 2 * ORDER);
    knots.extend([t[0]; ORDER]);
    knots.extend((1..=k).map(|j| t[(j as f64 * step).round() as usize]));
    knots.extend([t[n - 1]; ORDER]);
    Ok(knots)
}

/// Interior knot count actually used for `n` samples when `k` is requested.
#[must_use]
pub fn effective_knot_count(n: usize, k: usize) -> usize {
    if n >= k + ORDER {
        k
    } else {
        n.saturating_sub(ORDER).max(1)
    }
}

/// Least-squares cubic fit with `k` interior knots.
pub fn fit(pc: &ParameterizedChain, k: usize) -> Result<BSplineCurve> {
    let knots = place_knots(pc.t(), k)?;
    fit_with_knots(pc, knots)
}

/// Like [`fit`], reducing `k` when the chain is too short for it.
pub fn fit_adaptive(pc: &ParameterizedChain, k: usize) -> Result<BSplineCurve> {
    fit(pc, effective_knot_count(pc.len(), k))
}

/// Least-squares fit on a caller-supplied clamped knot vector.
pub fn fit_with_knots(pc: &ParameterizedChain, knots: Vec<f64>) -> Result<BSplineCurve> {
    let n_ctrl = knots.len() - ORDER;
    let dim = pc.dim();
    // upper-triangular band: r[row][j] is element (row, row + j)
    let mut r = vec![[0.0f64; ORDER]; n_ctrl];
    let mut rhs = vec![0.0f64; n_ctrl * dim];
    let mut h_rhs = vec![0.0f64; dim];
    for i in 0..pc.len() {
        let t = pc.t()[i];
        let span = find_span(&knots, n_ctrl, t);
        let mut h = basis_functions(&knots, span, t);
        h_rhs.copy_from_slice(pc.coord(i));
        let first = span - DEGREE;
        for j in 0..ORDER {
            if h[j] == 0.0 {
                continue;
            }
            let row = first + j;
            let piv = r[row][0];
            let hyp = piv.hypot(h[j]);
            let (c, s) = (piv / hyp, h[j] / hyp);
            r[row][0] = hyp;
            h[j] = 0.0;
            for l in 1..ORDER - j {
                let a = r[row][l];
                let b = h[j + l];
                r[row][l] = c * a + s * b;
                h[j + l] = c * b - s * a;
            }
            for d in 0..dim {
                let a = rhs[row * dim + d];
                let b = h_rhs[d];
                rhs[row * dim + d] = c * a + s * b;
                h_rhs[d] = c * b - s * a;
            }
        }
    }
    let scale = r.iter().map(|row| row[0].abs()).fold(0.0, f64::max);
    let mut coeffs = vec![0.0f64; n_ctrl * dim];
    for row in (0..n_ctrl).rev() {
        let piv = r[row][0];
        if !(piv.abs() > 1e-12 * scale.max(1.0)) {
            return Err(Error::RankDeficient);
        }
        for d in 0..dim {
            let mut acc = rhs[row * dim + d];
            for l in 1..ORDER {
                if row + l < n_ctrl {
                    acc -= r[row][l] * coeffs[(row + l) * dim + d];
                }
            }
            coeffs[row * dim + d] = acc / piv;
        }
    }
    Ok(BSplineCurve { knots, dim, coeffs })
}

/// Root-mean-square distance between the chain samples and the curve at
/// their parameters.
#[must_use]
pub fn rms_residual(curve: &BSplineCurve, pc: &ParameterizedChain) -> f64 {
    if pc.is_empty() {
        return 0.0;
    }
    let sum: f64 = (0..pc.len())
        .map(|i| {
            let p = curve.evaluate(pc.t()[i]).expect("samples lie in t_range");
            p.iter()
                .zip(pc.coord(i))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
        })
        .sum();
    (sum / pc.len() as f64).sqrt()
}

/// Adds a depth coordinate to every chain pixel, keeping the 2D arc-length
/// parameterization.
///
/// Pixels without valid depth get z interpolated linearly in `t` between
/// the nearest valid pixels along the chain; before the first and after the
/// last valid pixel the nearest valid value is held.
pub fn lift_to_3d(chain: &SegmentChain, depth: &DepthMap) -> Result<ParameterizedChain> {
    let pixels = chain.pixels();
    let t = chain_arc_length(chain);
    let raw: Vec<Option<f64>> = pixels.iter().map(|&p| depth.get(p)).collect();
    let valid: Vec<usize> = (0..raw.len()).filter(|&i| raw[i].is_some()).collect();
    if valid.is_empty() {
        return Err(Error::NoDepthSupport);
    }
    let mut z = vec![0.0; raw.len()];
    let mut next = 0; // index into `valid` of the first valid sample at or after i
    for i in 0..raw.len() {
        while next < valid.len() && valid[next] < i {
            next += 1;
        }
        z[i] = match raw[i] {
            Some(v) => v,
            None if next == 0 => raw[valid[0]].expect("valid"),
            None if next == valid.len() => raw[valid[valid.len() - 1]].expect("valid"),
            None => {
                let (a, b) = (valid[next - 1], valid[next]);
                let (za, zb) = (raw[a].expect("valid"), raw[b].expect("valid"));
                let w = (t[i] - t[a]) / (t[b] - t[a]);
                za + w * (zb - za)
            }
        };
    }
    let coords: Vec<Vec<f64>> = pixels
        .iter()
        .zip(&z)
        .map(|(p, &zi)| vec![f64::from(p.x), f64::from(p.y), zi])
        .collect();
    ParameterizedChain::new(&t, &coords)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::SQRT_2;

    use super::*;
    use crate::chainer::{ChainLink, SegmentChain};
    use crate::walker::PixelPath;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    fn path(v: &[(i32, i32)]) -> PixelPath {
        PixelPath::new(v.iter().map(|&p| p.into()).collect())
    }

    fn chain(parts: &[&[(i32, i32)]]) -> SegmentChain {
        let segments: Vec<ChainLink> = parts
            .iter()
            .map(|p| ChainLink {
                path: path(p),
                reversed: false,
            })
            .collect();
        let gap_distances = segments
            .windows(2)
            .map(|w| w[0].last().distance(w[1].first()))
            .collect();
        SegmentChain {
            segments,
            gap_distances,
        }
    }

    fn pc_from_fn(n: usize, f: impl Fn(f64) -> Vec<f64>) -> ParameterizedChain {
        let t: Vec<f64> = (0..n).map(|i| i as f64 * 0.731).collect();
        let coords: Vec<Vec<f64>> = t.iter().map(|&ti| f(ti)).collect();
        ParameterizedChain::new(&t, &coords).unwrap()
    }

    /// Cox-de Boor recursion straight from the definition; independent of
    /// both the span search and the triangular basis table.
    fn basis_recursive(knots: &[f64], i: usize, p: usize, t: f64) -> f64 {
        if p == 0 {
            return if knots[i] <= t && t < knots[i + 1] { 1.0 } else { 0.0 };
        }
        let mut v = 0.0;
        let d1 = knots[i + p] - knots[i];
        if d1 > 0.0 {
            v += (t - knots[i]) / d1 * basis_recursive(knots, i, p - 1, t);
        }
        let d2 = knots[i + p + 1] - knots[i + 1];
        if d2 > 0.0 {
            v += (knots[i + p + 1] - t) / d2 * basis_recursive(knots, i + 1, p - 1, t);
        }
        v
    }

    fn evaluate_by_definition(curve: &BSplineCurve, t: f64) -> Vec<f64> {
        let n = curve.control_count();
        if t == curve.t_range()[1] {
            // half-open spans: at a clamped right end only the last control point counts
            return curve.control_point(n - 1).to_vec();
        }
        let mut out = vec![0.0; curve.dim()];
        for i in 0..n {
            let b = basis_recursive(curve.knots(), i, DEGREE, t);
            for (o, c) in out.iter_mut().zip(curve.control_point(i)) {
                *o += b * c;
            }
        }
        out
    }

    #[test]
    fn parameterize_examples() {
        assert_eq!(parameterize(&chain(&[&[(0, 0), (1, 0), (2, 0)]])).t(), &[0.0, 1.0, 2.0]);
        let two = chain(&[&[(0, 0), (1, 0)], &[(5, 0), (6, 0)]]);
        assert_eq!(two.gap_distances, vec![4.0]);
        assert_eq!(parameterize(&two).t(), &[0.0, 1.0, 5.0, 6.0]);
        assert_eq!(parameterize(&chain(&[&[(0, 0), (1, 1)]])).t(), &[0.0, SQRT_2]);
    }

    #[test]
    fn parameterize_applies_reversal() {
        let mut c = chain(&[&[(0, 0), (1, 0)], &[(6, 0), (5, 0)]]);
        c.segments[1].reversed = true;
        c.gap_distances = vec![4.0];
        let pc = parameterize(&c);
        assert_eq!(pc.coord(2), &[5.0, 0.0]);
        assert_eq!(pc.coord(3), &[6.0, 0.0]);
    }

    #[test]
    fn duplicate_parameters_are_collapsed() {
        let pc = ParameterizedChain::new(
            &[0.0, 1.0, 1.0, 2.0],
            &[vec![0.0, 0.0], vec![1.0, 0.0], vec![9.0, 9.0], vec![2.0, 0.0]],
        )
        .unwrap();
        assert_eq!(pc.t(), &[0.0, 1.0, 2.0]);
        assert_eq!(pc.coord(1), &[1.0, 0.0]);
    }

    #[test]
    fn knot_placement_examples() {
        let t: Vec<f64> = (0..100).map(f64::from).collect();
        let knots = place_knots(&t, 4).unwrap();
        assert_eq!(&knots[4..8], &[20.0, 40.0, 59.0, 79.0]);
        assert_eq!(&knots[..4], &[0.0; 4]);
        assert_eq!(&knots[8..], &[99.0; 4]);
        let t6: Vec<f64> = (0..6).map(f64::from).collect();
        assert_eq!(place_knots(&t6, 1).unwrap()[4], 3.0);
        let t5: Vec<f64> = (0..5).map(f64::from).collect();
        assert!(matches!(
            place_knots(&t5, 25),
            Err(Error::InsufficientData { points: 5, knots: 25 })
        ));
    }

    #[test]
    fn knot_count_fallback() {
        assert_eq!(effective_knot_count(100, 25), 25);
        assert_eq!(effective_knot_count(29, 25), 25);
        assert_eq!(effective_knot_count(28, 25), 24);
        assert_eq!(effective_knot_count(5, 25), 1);
        assert_eq!(effective_knot_count(3, 25), 1);
    }

    #[test]
    fn affine_data_is_reproduced() {
        let pc = pc_from_fn(120, |t| vec![3.0 + 0.5 * t, 6.0 + t]);
        for k in [1, 5, 25] {
            let c = fit(&pc, k).unwrap();
            assert!(rms_residual(&c, &pc) < 1e-9);
            for p in c.sample(300) {
                // y = 2x on this data
                assert!((p[1] - 2.0 * p[0]).abs() <= 1e-6);
            }
        }
    }

    #[test]
    fn single_cubic_is_reproduced() {
        let cubic = |t: f64| {
            let s = t / 100.0;
            vec![1.0 + 40.0 * s - 7.0 * s * s + 3.0 * s * s * s, -2.0 + 9.0 * s * s - 5.0 * s * s * s]
        };
        let pc = pc_from_fn(200, cubic);
        let c = fit(&pc, 4).unwrap();
        let rms = rms_residual(&c, &pc);
        assert!(rms <= 1e-6, "rms {rms}");
        // also off the data sites
        let [lo, hi] = c.t_range();
        for i in 0..=50 {
            let t = lo + (hi - lo) * f64::from(i) / 50.0;
            let p = c.evaluate(t).unwrap();
            let q = cubic(t);
            assert!((p[0] - q[0]).abs() < 1e-6 && (p[1] - q[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn noisy_arc_residual_is_bounded() {
        use rand_distr::{Distribution, Normal};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let (t, coords): (Vec<f64>, Vec<Vec<f64>>) = (0..100)
            .map(|i| {
                let a = f64::from(i) / 99.0 * 2.0;
                let x = 200.0 + 150.0 * a.cos() + noise.sample(&mut rng);
                let y = 200.0 + 150.0 * a.sin() + noise.sample(&mut rng);
                (f64::from(i) * 3.0, vec![x, y])
            })
            .unzip();
        let pc = ParameterizedChain::new(&t, &coords).unwrap();
        let c = fit_adaptive(&pc, 25).unwrap();
        assert!(rms_residual(&c, &pc) <= 1.5);
    }

    #[test]
    fn evaluate_ends_and_range() {
        let pc = pc_from_fn(60, |t| vec![t.sin() * 10.0, t.cos() * 4.0]);
        let c = fit(&pc, 6).unwrap();
        let [lo, hi] = c.t_range();
        assert_eq!(c.evaluate(lo).unwrap(), c.control_point(0));
        assert_eq!(c.evaluate(hi).unwrap(), c.control_point(c.control_count() - 1));
        assert!(matches!(c.evaluate(hi + 1e-9), Err(Error::OutOfRange { .. })));
        assert!(c.evaluate(lo - 1.0).is_err());
    }

    #[test]
    fn straight_line_midpoint() {
        let c = BSplineCurve::clamped_uniform(&[
            vec![0.0, 0.0],
            vec![1.0, 2.0],
            vec![2.0, 4.0],
            vec![3.0, 6.0],
            vec![4.0, 8.0],
        ])
        .unwrap();
        let p = c.evaluate(0.5).unwrap();
        assert!((p[1] - 2.0 * p[0]).abs() < 1e-9);
        assert!(p[0] > 0.0 && p[0] < 4.0);
    }

    #[test]
    fn de_boor_matches_basis_definition() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let n = rng.random_range(4..12);
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)])
                .collect();
            let c = BSplineCurve::clamped_uniform(&pts).unwrap();
            for i in 0..=40 {
                let t = f64::from(i) / 40.0;
                let a = c.evaluate(t).unwrap();
                let b = evaluate_by_definition(&c, t);
                assert!((a[0] - b[0]).abs() < 1e-12 && (a[1] - b[1]).abs() < 1e-12, "t={t}");
            }
        }
    }

    #[test]
    fn basis_partition_of_unity() {
        let t: Vec<f64> = (0..40).map(|i| f64::from(i) * 1.3).collect();
        let knots = place_knots(&t, 6).unwrap();
        let n_ctrl = knots.len() - ORDER;
        for &ti in &t {
            let s = find_span(&knots, n_ctrl, ti);
            assert!(knots[s] <= ti && (ti < knots[s + 1] || s == n_ctrl - 1));
            let sum: f64 = basis_functions(&knots, s, ti).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn three_dimensional_fit() {
        let pc = pc_from_fn(80, |t| vec![t, 2.0 * t, 500.0 - 0.25 * t]);
        let c = fit(&pc, 5).unwrap();
        assert_eq!(c.dim(), 3);
        assert!(rms_residual(&c, &pc) < 1e-9);
    }

    #[test]
    fn lift_constant_depth() {
        let c = chain(&[&[(0, 0), (1, 0), (2, 0), (3, 1)]]);
        let d = DepthMap::constant(5, 5, 500.0).unwrap();
        let pc = lift_to_3d(&c, &d).unwrap();
        assert!(pc.coords().iter().all(|p| p[2] == 500.0));
        assert_eq!(pc.t(), parameterize(&c).t());
    }

    #[test]
    fn lift_interpolates_and_clamps() {
        let c = chain(&[&[(0, 0), (1, 0), (2, 0)]]);
        let d = DepthMap::from_raw(3, 3, vec![100.0, 0.0, 300.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        let z: Vec<f64> = lift_to_3d(&c, &d).unwrap().coords().iter().map(|p| p[2]).collect();
        assert_eq!(z, vec![100.0, 200.0, 300.0]);
        let d2 = DepthMap::from_raw(3, 3, vec![0.0, 0.0, 300.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap();
        let z2: Vec<f64> = lift_to_3d(&c, &d2).unwrap().coords().iter().map(|p| p[2]).collect();
        assert_eq!(z2, vec![300.0, 300.0, 300.0]);
        let d3 = DepthMap::constant(3, 3, 0.0).unwrap();
        assert!(matches!(lift_to_3d(&c, &d3), Err(Error::NoDepthSupport)));
    }

    #[test]
    fn curve_instance_roundtrip() {
        let pc = pc_from_fn(60, |t| vec![t.sin(), t]);
        let c = fit(&pc, 25).unwrap();
        assert_eq!(c.knots().len(), 33);
        assert_eq!(c.control_count(), 29);
        let inst = c.to_instance();
        inst.validate().unwrap();
        assert_eq!(BSplineCurve::from_instance(&inst).unwrap(), c);
    }

    fn random_fit() -> impl Strategy<Value = (ParameterizedChain, usize)> {
        (any::<u64>(), 10usize..120).prop_map(|(seed, n)| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut t = Vec::with_capacity(n);
            let mut acc = 0.0;
            for _ in 0..n {
                t.push(acc);
                acc += rng.random_range(0.5..2.0);
            }
            let coords: Vec<Vec<f64>> = t
                .iter()
                .map(|_| vec![rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)])
                .collect();
            let k = rng.random_range(1..=(n - 4).min(25));
            (ParameterizedChain::new(&t, &coords).unwrap(), k)
        })
    }

    fn in_convex_hull(p: &[f64], pts: &[Vec<f64>]) -> bool {
        // Andrew's monotone chain, then a signed-area test with tolerance
        let mut v: Vec<(f64, f64)> = pts.iter().map(|c| (c[0], c[1])).collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let cross = |o: (f64, f64), a: (f64, f64), b: (f64, f64)| {
            (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
        };
        let mut hull: Vec<(f64, f64)> = Vec::new();
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &(f64, f64)>> =
                if pass == 0 { Box::new(v.iter()) } else { Box::new(v.iter().rev()) };
            for &q in iter {
                while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                    hull.pop();
                }
                hull.push(q);
            }
            hull.pop();
        }
        let q = (p[0], p[1]);
        (0..hull.len()).all(|i| {
            let a = hull[i];
            let b = hull[(i + 1) % hull.len()];
            let len = ((b.0 - a.0).powi(2) + (b.1 - a.1).powi(2)).sqrt();
            cross(a, b, q) / len.max(1e-300) >= -1e-9
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn fits_satisfy_hull_and_clamping((pc, k) in random_fit()) {
            let c = fit(&pc, k).unwrap();
            let ctrl = c.control_points();
            let [lo, hi] = c.t_range();
            prop_assert_eq!(c.evaluate(lo).unwrap(), ctrl[0].clone());
            prop_assert_eq!(c.evaluate(hi).unwrap(), ctrl[ctrl.len() - 1].clone());
            for p in c.sample(64) {
                prop_assert!(in_convex_hull(&p, &ctrl));
            }
            let inner = &c.knots()[ORDER..c.knots().len() - ORDER];
            prop_assert!(inner.iter().all(|&x| x > lo && x < hi));
            prop_assert!(inner.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn scaling_t_leaves_shape_unchanged((pc, k) in random_fit(), scale in 0.1f64..10.0) {
            let c = fit(&pc, k).unwrap();
            let scaled_t: Vec<f64> = pc.t().iter().map(|t| t * scale).collect();
            let scaled = ParameterizedChain::new(&scaled_t, &pc.coords()).unwrap();
            let cs = fit(&scaled, k).unwrap();
            for (a, b) in c.sample(40).iter().zip(cs.sample(40)) {
                prop_assert!((a[0] - b[0]).abs() < 1e-6 && (a[1] - b[1]).abs() < 1e-6);
            }
        }

        #[test]
        fn refining_knots_never_increases_residual((pc, k) in random_fit()) {
            // insert one extra knot into an existing vector: nested spline spaces
            let knots = place_knots(pc.t(), k).unwrap();
            let coarse = fit_with_knots(&pc, knots.clone()).unwrap();
            let inner = &knots[ORDER..knots.len() - ORDER];
            let n = pc.len();
            let extra = pc.t()[n / 2];
            if !inner.contains(&extra) && n >= k + 5 {
                let mut fine = knots.clone();
                fine.push(extra);
                fine.sort_by(f64::total_cmp);
                if let Ok(fine) = fit_with_knots(&pc, fine) {
                    prop_assert!(rms_residual(&fine, &pc) <= rms_residual(&coarse, &pc) + 1e-9);
                }
            }
        }
    }
}
