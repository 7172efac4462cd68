//! Ordering of skeleton segments into per-object chains.
//!
//! Every pair of endpoints from different segments gets a cost
//! `J = m·J_d + (1 − m)·J_o`, where `J_d` is the endpoint distance in pixels
//! and `J_o` measures how far the two endpoint tangents are from a smooth
//! head-on continuation. Pairs are committed greedily, cheapest first, as
//! long as `J < J_th`, no endpoint is used twice and no chain closes on
//! itself. Whatever remains disconnected becomes a separate instance.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};
use crate::pixel::Pixel;
use crate::walker::PixelPath;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PathEnd {
    Head,
    Tail,
}

impl PathEnd {
    #[must_use]
    pub fn other(self) -> Self {
        match self {
            PathEnd::Head => PathEnd::Tail,
            PathEnd::Tail => PathEnd::Head,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EndpointDescriptor {
    pub segment_id: usize,
    pub end: PathEnd,
    pub position: Pixel,
    /// Unit vector pointing away from the segment interior.
    pub outgoing_tangent: [f64; 2],
}

impl EndpointDescriptor {
    pub fn new(segment_id: usize, path: &PixelPath, end: PathEnd, window: usize) -> Result<Self> {
        Ok(Self {
            segment_id,
            end,
            position: match end {
                PathEnd::Head => path.head(),
                PathEnd::Tail => path.tail(),
            },
            outgoing_tangent: endpoint_tangent(path, end, window)?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainerParams {
    /// Weight of the distance term, in `[0, 1]`.
    pub m: f64,
    /// Minimum segment length in pixels.
    pub p: usize,
    /// Connections are only made when `J < j_th`.
    pub j_th: f64,
    /// Window (in points, endpoint included) for tangent estimation.
    pub w: usize,
}

impl Default for ChainerParams {
    fn default() -> Self {
        Self {
            m: 0.05,
            p: 10,
            j_th: 10.0,
            w: 10,
        }
    }
}

impl ChainerParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.m) {
            return Err(Error::Config(format!("m = {} is outside [0, 1]", self.m)));
        }
        if self.p < 1 {
            return Err(Error::Config("p must be at least 1".into()));
        }
        if !(self.j_th > 0.0) {
            return Err(Error::Config(format!("j_th = {} must be positive", self.j_th)));
        }
        if self.w < 2 {
            return Err(Error::Config("w must be at least 2".into()));
        }
        Ok(())
    }
}

/// One segment inside a chain, with the orientation it is traversed in.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub path: PixelPath,
    pub reversed: bool,
}

impl ChainLink {
    /// Points in traversal order.
    pub fn points(&self) -> Box<dyn Iterator<Item = Pixel> + '_> {
        if self.reversed {
            Box::new(self.path.points().iter().rev().copied())
        } else {
            Box::new(self.path.points().iter().copied())
        }
    }

    #[must_use]
    pub fn first(&self) -> Pixel {
        if self.reversed {
            self.path.tail()
        } else {
            self.path.head()
        }
    }

    #[must_use]
    pub fn last(&self) -> Pixel {
        if self.reversed {
            self.path.head()
        } else {
            self.path.tail()
        }
    }
}

/// Ordered segments of one object instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentChain {
    pub segments: Vec<ChainLink>,
    /// Euclidean gap between consecutive segments; one shorter than `segments`.
    pub gap_distances: Vec<f64>,
}

impl SegmentChain {
    #[must_use]
    pub fn single(path: PixelPath) -> Self {
        Self {
            segments: vec![ChainLink {
                path,
                reversed: false,
            }],
            gap_distances: Vec::new(),
        }
    }

    /// All pixels in chain order.
    #[must_use]
    pub fn pixels(&self) -> Vec<Pixel> {
        self.segments.iter().flat_map(ChainLink::points).collect()
    }

    #[must_use]
    pub fn first(&self) -> Pixel {
        self.segments[0].first()
    }

    #[must_use]
    pub fn last(&self) -> Pixel {
        self.segments[self.segments.len() - 1].last()
    }

    /// The same chain traversed from the other end.
    #[must_use]
    pub fn reversed(&self) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .rev()
                .map(|l| ChainLink {
                    path: l.path.clone(),
                    reversed: !l.reversed,
                })
                .collect(),
            gap_distances: self.gap_distances.iter().rev().copied().collect(),
        }
    }

    #[must_use]
    pub fn point_count(&self) -> usize {
        self.segments.iter().map(|l| l.path.len()).sum()
    }
}

/// Keeps paths with at least `p` points, in order.
#[must_use]
pub fn filter_short(paths: Vec<PixelPath>, p: usize) -> Vec<PixelPath> {
    paths.into_iter().filter(|path| path.len() >= p).collect()
}

/// Unit vector from the point `w - 1` steps inside the path (clamped to the
/// far end) to the endpoint.
pub fn endpoint_tangent(path: &PixelPath, end: PathEnd, w: usize) -> Result<[f64; 2]> {
    let pts = path.points();
    if pts.len() < 2 {
        return Err(Error::Curve("tangent of a single-point path".into()));
    }
    let reach = w.saturating_sub(1).clamp(1, pts.len() - 1);
    let (tip, inner) = match end {
        PathEnd::Head => (pts[0], pts[reach]),
        PathEnd::Tail => (pts[pts.len() - 1], pts[pts.len() - 1 - reach]),
    };
    let (dx, dy) = (f64::from(tip.x - inner.x), f64::from(tip.y - inner.y));
    let n = dx.hypot(dy);
    Ok([dx / n, dy / n])
}

fn angle_between(a: [f64; 2], b: [f64; 2]) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.abs().atan2(dot)
}

/// Orientation term: `|π − φ_a − φ_b|` with `φ_i = π/2 − ∠(tangent_i, direction to the other endpoint)`.
///
/// Zero for a head-on collinear continuation, 2π for endpoints facing away
/// from each other.
#[must_use]
pub fn orientation_cost(a: &EndpointDescriptor, b: &EndpointDescriptor) -> f64 {
    let d = [
        f64::from(b.position.x - a.position.x),
        f64::from(b.position.y - a.position.y),
    ];
    let n = d[0].hypot(d[1]);
    if n == 0.0 {
        return 0.0;
    }
    let toward_b = [d[0] / n, d[1] / n];
    let toward_a = [-toward_b[0], -toward_b[1]];
    let phi_a = FRAC_PI_2 - angle_between(a.outgoing_tangent, toward_b);
    let phi_b = FRAC_PI_2 - angle_between(b.outgoing_tangent, toward_a);
    (PI - phi_a - phi_b).abs()
}

#[must_use]
pub fn pair_cost(a: &EndpointDescriptor, b: &EndpointDescriptor, m: f64) -> f64 {
    let distance = a.position.distance(b.position);
    m * distance + (1.0 - m) * orientation_cost(a, b)
}

/// Candidate connection between two endpoints of different segments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Connection {
    pub a: (usize, PathEnd),
    pub b: (usize, PathEnd),
    pub cost: f64,
}

/// Endpoint descriptors for all paths: `[seg0 head, seg0 tail, seg1 head, ...]`.
pub fn describe_endpoints(paths: &[PixelPath], w: usize) -> Result<Vec<EndpointDescriptor>> {
    let mut out = Vec::with_capacity(paths.len() * 2);
    for (i, path) in paths.iter().enumerate() {
        out.push(EndpointDescriptor::new(i, path, PathEnd::Head, w)?);
        out.push(EndpointDescriptor::new(i, path, PathEnd::Tail, w)?);
    }
    Ok(out)
}

/// All admissible pairs (different segments), sorted by cost with
/// lexicographic tie-breaking on `(segment_a, end_a, segment_b, end_b)`.
#[must_use]
pub fn candidate_pairs(endpoints: &[EndpointDescriptor], m: f64) -> Vec<Connection> {
    let mut pairs = Vec::new();
    for (i, a) in endpoints.iter().enumerate() {
        for b in &endpoints[i + 1..] {
            if a.segment_id == b.segment_id {
                continue;
            }
            pairs.push(Connection {
                a: (a.segment_id, a.end),
                b: (b.segment_id, b.end),
                cost: pair_cost(a, b, m),
            });
        }
    }
    pairs.sort_by(|x, y| x.cost.total_cmp(&y.cost).then((x.a, x.b).cmp(&(y.a, y.b))));
    pairs
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Greedy commit loop; returns the committed connections in commit order.
#[must_use]
pub fn greedy_connections(paths: &[PixelPath], params: &ChainerParams) -> Vec<Connection> {
    let s = paths.len();
    if s < 2 {
        return Vec::new();
    }
    let endpoints = describe_endpoints(paths, params.w).expect("paths have at least two points");
    let slot = |(seg, end): (usize, PathEnd)| 2 * seg + usize::from(end == PathEnd::Tail);
    let mut used = vec![false; 2 * s];
    let mut parent: Vec<usize> = (0..s).collect();
    let mut committed = Vec::new();
    for c in candidate_pairs(&endpoints, params.m) {
        if !(c.cost < params.j_th) || committed.len() == s - 1 {
            break;
        }
        if used[slot(c.a)] || used[slot(c.b)] {
            continue;
        }
        let (ra, rb) = (find(&mut parent, c.a.0), find(&mut parent, c.b.0));
        if ra == rb {
            continue;
        }
        parent[ra] = rb;
        used[slot(c.a)] = true;
        used[slot(c.b)] = true;
        committed.push(c);
    }
    committed
}

/// Assembles chains from a set of acyclic connections.
///
/// Chains are emitted in order of their lowest segment id; each starts from
/// the lower-id terminal segment of its component, entered through its free
/// end.
#[must_use]
pub fn assemble(paths: &[PixelPath], connections: &[Connection]) -> Vec<SegmentChain> {
    let s = paths.len();
    // link[seg][end] = (other segment, other end)
    let mut link: Vec<[Option<(usize, PathEnd)>; 2]> = vec![[None, None]; s];
    let idx = |e: PathEnd| usize::from(e == PathEnd::Tail);
    for c in connections {
        link[c.a.0][idx(c.a.1)] = Some(c.b);
        link[c.b.0][idx(c.b.1)] = Some(c.a);
    }
    let mut placed = vec![false; s];
    let mut chains = Vec::new();
    for seed in 0..s {
        if placed[seed] {
            continue;
        }
        // find the terminal segments of seed's component
        let mut terminals = Vec::new();
        let mut stack = vec![seed];
        let mut seen = vec![seed];
        while let Some(g) = stack.pop() {
            if link[g][0].is_none() || link[g][1].is_none() {
                terminals.push(g);
            }
            for (nb, _) in link[g].iter().flatten() {
                if !seen.contains(nb) {
                    seen.push(*nb);
                    stack.push(*nb);
                }
            }
        }
        let start = *terminals.iter().min().expect("acyclic component has a terminal");
        let mut entry = if link[start][0].is_none() {
            PathEnd::Head
        } else {
            PathEnd::Tail
        };
        let mut current = start;
        let mut chain = SegmentChain {
            segments: Vec::new(),
            gap_distances: Vec::new(),
        };
        loop {
            placed[current] = true;
            let path = &paths[current];
            chain.segments.push(ChainLink {
                path: path.clone(),
                reversed: entry == PathEnd::Tail,
            });
            let exit = entry.other();
            let Some((next, next_entry)) = link[current][idx(exit)] else {
                break;
            };
            let from = if exit == PathEnd::Head { path.head() } else { path.tail() };
            let to = if next_entry == PathEnd::Head {
                paths[next].head()
            } else {
                paths[next].tail()
            };
            chain.gap_distances.push(from.distance(to));
            current = next;
            entry = next_entry;
        }
        chains.push(chain);
    }
    chains
}

/// Greedy chaining of already filtered paths into per-instance chains.
#[must_use]
pub fn chain_greedy(paths: &[PixelPath], params: &ChainerParams) -> Vec<SegmentChain> {
    assemble(paths, &greedy_connections(paths, params))
}
