//! Integer pixel coordinates and a dense occupancy set over their bounding box.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

/// Integer pixel coordinate; `x` is the column and `y` the row.
///
/// Ordering is row-major: by `y`, then by `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Pixel {
    pub x: i32,
    pub y: i32,
}

impl Pixel {
    #[must_use]
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    /// The eight surrounding coordinates, clockwise from north.
    #[must_use]
    pub fn neighbors8(self) -> [Pixel; 8] {
        NEIGHBOR_OFFSETS.map(|(dx, dy)| Pixel::new(self.x + dx, self.y + dy))
    }

    #[must_use]
    pub fn is_neighbor8(self, other: Pixel) -> bool {
        self != other && (self.x - other.x).abs() <= 1 && (self.y - other.y).abs() <= 1
    }

    /// Euclidean distance between pixel centers.
    #[must_use]
    pub fn distance(self, other: Pixel) -> f64 {
        let dx = f64::from(self.x - other.x);
        let dy = f64::from(self.y - other.y);
        dx.hypot(dy)
    }

    #[must_use]
    pub fn to_f64(self) -> [f64; 2] {
        [f64::from(self.x), f64::from(self.y)]
    }
}

impl Ord for Pixel {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Pixel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<(i32, i32)> for Pixel {
    fn from((x, y): (i32, i32)) -> Self {
        Self::new(x, y)
    }
}

/// N, NE, E, SE, S, SW, W, NW with y growing downwards.
pub(crate) const NEIGHBOR_OFFSETS: [(i32, i32); 8] = [
    (0, -1),
    (1, -1),
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
];

/// Membership grid covering the bounding box of a pixel set.
///
/// Lookups outside the box return `false`, so arbitrary (even negative)
/// coordinates are supported.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PixelSet {
    x0: i32,
    y0: i32,
    width: usize,
    height: usize,
    bits: Vec<bool>,
    len: usize,
}

impl PixelSet {
    #[must_use]
    pub fn new(pixels: &[Pixel]) -> Self {
        if pixels.is_empty() {
            return Self {
                x0: 0,
                y0: 0,
                width: 0,
                height: 0,
                bits: Vec::new(),
                len: 0,
            };
        }
        let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for p in pixels {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let width = (x1 - x0) as usize + 1;
        let height = (y1 - y0) as usize + 1;
        let mut set = Self {
            x0,
            y0,
            width,
            height,
            bits: vec![false; width * height],
            len: 0,
        };
        for &p in pixels {
            set.insert(p);
        }
        set
    }

    fn index(&self, p: Pixel) -> Option<usize> {
        let dx = p.x.checked_sub(self.x0)?;
        let dy = p.y.checked_sub(self.y0)?;
        if dx < 0 || dy < 0 {
            return None;
        }
        let (dx, dy) = (dx as usize, dy as usize);
        (dx < self.width && dy < self.height).then(|| dy * self.width + dx)
    }

    #[must_use]
    pub fn contains(&self, p: Pixel) -> bool {
        self.index(p).is_some_and(|i| self.bits[i])
    }

    /// Inserts a pixel inside the original bounding box; returns whether it was new.
    ///
    /// # Panics
    /// If `p` lies outside the bounding box the set was built with.
    pub fn insert(&mut self, p: Pixel) -> bool {
        let i = self.index(p).expect("pixel outside PixelSet bounds");
        let fresh = !self.bits[i];
        self.bits[i] = true;
        self.len += usize::from(fresh);
        fresh
    }

    pub fn remove(&mut self, p: Pixel) -> bool {
        match self.index(p) {
            Some(i) if self.bits[i] => {
                self.bits[i] = false;
                self.len -= 1;
                true
            }
            _ => false,
        }
    }

    #[must_use]
    pub fn len(&self) -> usize {
        self.len
    }

    #[must_use]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Number of occupied 8-neighbors of `p`.
    #[must_use]
    pub fn neighbor_count(&self, p: Pixel) -> usize {
        p.neighbors8().iter().filter(|&&q| self.contains(q)).count()
    }

    /// Occupied 8-neighbors of `p` in row-major order.
    #[must_use]
    pub fn neighbors(&self, p: Pixel) -> Vec<Pixel> {
        let mut out: Vec<Pixel> = p
            .neighbors8()
            .into_iter()
            .filter(|&q| self.contains(q))
            .collect();
        out.sort_unstable();
        out
    }

    /// Occupied pixels in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = Pixel> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| {
            Pixel::new(
                self.x0 + (i % self.width) as i32,
                self.y0 + (i / self.width) as i32,
            )
        })
    }
}
