//! Pixel-by-pixel traversal of branch-free skeleton segments.

use std::f64::consts::SQRT_2;

use crate::error::{Error, Result};
use crate::pixel::{Pixel, PixelSet};
use crate::skeleton::Skeleton;

/// Ordered, simple, 8-connected run of skeleton pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelPath {
    points: Vec<Pixel>,
    length_px: f64,
}

/// 1 for axis steps, √2 for diagonal steps.
#[inline]
#[must_use]
pub fn step_length(a: Pixel, b: Pixel) -> f64 {
    if a.x != b.x && a.y != b.y {
        SQRT_2
    } else {
        1.0
    }
}

impl PixelPath {
    /// # Panics
    /// If consecutive points are not 8-neighbors.
    #[must_use]
    pub fn new(points: Vec<Pixel>) -> Self {
        let length_px = points
            .windows(2)
            .map(|w| {
                assert!(w[0].is_neighbor8(w[1]), "{:?} -> {:?} is not a step", w[0], w[1]);
                step_length(w[0], w[1])
            })
            .sum();
        Self { points, length_px }
    }

    #[must_use]
    pub fn points(&self) -> &[Pixel] {
        &self.points
    }

    #[must_use]
    pub fn length_px(&self) -> f64 {
        self.length_px
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
    pub fn head(&self) -> Pixel {
        self.points[0]
    }

    #[must_use]
    pub fn tail(&self) -> Pixel {
        self.points[self.points.len() - 1]
    }

    #[must_use]
    pub fn reversed(&self) -> Self {
        let mut points = self.points.clone();
        points.reverse();
        Self {
            points,
            length_px: self.length_px,
        }
    }
}

fn walk_from(skel: &Skeleton, start: Pixel, visited: &mut PixelSet) -> Vec<Pixel> {
    let mut points = vec![start];
    visited.insert(start);
    let mut current = start;
    // at most one unvisited neighbor exists at each step
    while let Some(next) = skel
        .neighbors(current)
        .into_iter()
        .find(|&q| !visited.contains(q))
    {
        visited.insert(next);
        points.push(next);
        current = next;
    }
    points
}

/// Walks every segment of a branch-free skeleton.
///
/// Open segments are walked from their row-major-first endpoint, consuming
/// both of their endpoints. Isolated pixels become single-point paths, and
/// closed loops left over at the end are cut with [`walk_cycle`].
#[must_use]
pub fn walk_segments(skel: &Skeleton) -> Vec<PixelPath> {
    let mut visited = PixelSet::new(skel.pixels());
    for &p in skel.pixels() {
        visited.remove(p);
    }
    let mut paths = Vec::new();
    for &start in skel.endpoints() {
        if visited.contains(start) {
            continue;
        }
        paths.push(PixelPath::new(walk_from(skel, start, &mut visited)));
    }
    for &p in skel.pixels() {
        if visited.contains(p) {
            continue;
        }
        if skel.neighbor_count(p) == 0 {
            visited.insert(p);
            paths.push(PixelPath::new(vec![p]));
            continue;
        }
        // every pixel left has exactly two neighbors: a closed loop
        let mut component = Vec::new();
        let mut stack = vec![p];
        visited.insert(p);
        while let Some(q) = stack.pop() {
            component.push(q);
            for r in skel.neighbors(q) {
                if !visited.contains(r) {
                    visited.insert(r);
                    stack.push(r);
                }
            }
        }
        let path = walk_cycle(&component).expect("branch-free component without endpoints is a cycle");
        paths.push(path);
    }
    paths
}

/// Cuts a closed loop into an open path.
///
/// Starts at the row-major-smallest pixel and steps first to its smaller
/// neighbor; afterwards axis steps are preferred over diagonal ones, then
/// row-major order. The walk must visit every pixel and end next to the
/// start.
pub fn walk_cycle(component: &[Pixel]) -> Result<PixelPath> {
    let set = PixelSet::new(component);
    if set.len() < 3 {
        return Err(Error::NotACycle(format!("{} pixels", set.len())));
    }
    if let Some(p) = set.iter().find(|&p| set.neighbor_count(p) < 2) {
        return Err(Error::NotACycle(format!(
            "pixel ({}, {}) has {} neighbors",
            p.x,
            p.y,
            set.neighbor_count(p)
        )));
    }
    let start = set.iter().next().expect("non-empty");
    let mut visited = PixelSet::new(component);
    for p in component {
        visited.remove(*p);
    }
    visited.insert(start);
    let mut points = vec![start, set.neighbors(start)[0]];
    visited.insert(points[1]);
    let mut current = points[1];
    loop {
        let mut options: Vec<Pixel> = set
            .neighbors(current)
            .into_iter()
            .filter(|&q| !visited.contains(q))
            .collect();
        options.sort_by_key(|&q| (step_length(current, q) > 1.0, q));
        let Some(&next) = options.first() else { break };
        visited.insert(next);
        points.push(next);
        current = next;
    }
    if points.len() != set.len() {
        return Err(Error::NotACycle(format!(
            "walk stalled after {} of {} pixels",
            points.len(),
            set.len()
        )));
    }
    if !current.is_neighbor8(start) {
        return Err(Error::NotACycle("walk does not close".into()));
    }
    Ok(PixelPath::new(points))
}
