//! Mask and depth rasters, plus the JSON curve document exchanged with
//! downstream consumers.

use std::fs;
use std::path::Path;

use image::{DynamicImage, GrayImage, ImageBuffer, Luma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pixel::Pixel;

/// Row-major boolean occupancy grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryMask {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::TooSmall { width, height });
        }
        if data.len() != width * height {
            return Err(Error::DataLength {
                expected: width * height,
                got: data.len(),
            });
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    pub fn empty(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![false; width * height])
    }

    /// Builds a mask with exactly the given pixels set; pixels outside the
    /// raster are ignored.
    pub fn from_pixels(width: usize, height: usize, pixels: &[Pixel]) -> Result<Self> {
        let mut mask = Self::empty(width, height)?;
        for &p in pixels {
            mask.set(p, true);
        }
        Ok(mask)
    }

    /// Occupied iff grayscale intensity is strictly above `threshold`.
    /// Color images are reduced to luma first.
    pub fn from_image(img: &DynamicImage, threshold: u8) -> Result<Self> {
        match img {
            DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageRgb8(_)
            | DynamicImage::ImageRgba8(_) => {}
            other => {
                return Err(Error::UnsupportedFormat(format!(
                    "{:?}, masks must be 8-bit",
                    other.color()
                )))
            }
        }
        let gray = img.to_luma8();
        let (w, h) = (gray.width() as usize, gray.height() as usize);
        if w == 0 || h == 0 {
            return Err(Error::TooSmall {
                width: w,
                height: h,
            });
        }
        let data = gray.pixels().map(|p| p.0[0] > threshold).collect();
        Self::new(w, h, data)
    }

    #[must_use]
    pub fn width(&self) -> usize {
        self.width
    }

    #[must_use]
    pub fn height(&self) -> usize {
        self.height
    }

    #[must_use]
    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[must_use]
    pub fn in_bounds(&self, p: Pixel) -> bool {
        p.x >= 0 && p.y >= 0 && (p.x as usize) < self.width && (p.y as usize) < self.height
    }

    /// Occupancy at `p`; anything outside the raster reads as unoccupied.
    #[must_use]
    pub fn get(&self, p: Pixel) -> bool {
        self.in_bounds(p) && self.data[p.y as usize * self.width + p.x as usize]
    }

    pub fn set(&mut self, p: Pixel, value: bool) {
        if self.in_bounds(p) {
            self.data[p.y as usize * self.width + p.x as usize] = value;
        }
    }

    #[must_use]
    pub fn count(&self) -> usize {
        self.data.iter().filter(|&&b| b).count()
    }

    #[must_use]
    pub fn is_blank(&self) -> bool {
        !self.data.iter().any(|&b| b)
    }

    /// Occupied pixels in row-major order.
    #[must_use]
    pub fn pixels(&self) -> Vec<Pixel> {
        self.data
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(|(i, _)| Pixel::new((i % self.width) as i32, (i / self.width) as i32))
            .collect()
    }

    #[must_use]
    pub fn to_image(&self) -> GrayImage {
        ImageBuffer::from_fn(self.width as u32, self.height as u32, |x, y| {
            Luma([if self.data[y as usize * self.width + x as usize] {
                255
            } else {
                0
            }])
        })
    }

    pub fn save_png(&self, path: &Path) -> Result<()> {
        self.to_image().save(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub fn load_mask(path: &Path, threshold: u8) -> Result<BinaryMask> {
    let img = image::open(path).map_err(|source| Error::Image {
        path: path.to_path_buf(),
        source,
    })?;
    BinaryMask::from_image(&img, threshold)
}

/// Depth raster with an explicit validity flag per pixel.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthMap {
    width: usize,
    height: usize,
    data: Vec<f32>,
    valid: Vec<bool>,
}

impl DepthMap {
    /// Raw sensor values; zero marks a missing measurement.
    pub fn from_raw(width: usize, height: usize, raw: Vec<f32>) -> Result<Self> {
        if raw.len() != width * height {
            return Err(Error::DataLength {
                expected: width * height,
                got: raw.len(),
            });
        }
        let valid = raw.iter().map(|&v| v != 0.0 && v.is_finite()).collect();
        Ok(Self {
            width,
            height,
            data: raw,
            valid,
        })
    }

    pub fn constant(width: usize, height: usize, value: f32) -> Result<Self> {
        Self::from_raw(width, height, vec![value; width * height])
    }

    #[must_use]
    pub fn width(&self) -> usize {
        self.width
    }

    #[must_use]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Depth at `p` when the pixel is inside the raster and valid.
    #[must_use]
    pub fn get(&self, p: Pixel) -> Option<f64> {
        if p.x < 0 || p.y < 0 || p.x as usize >= self.width || p.y as usize >= self.height {
            return None;
        }
        let i = p.y as usize * self.width + p.x as usize;
        self.valid[i].then(|| f64::from(self.data[i]))
    }

    #[must_use]
    pub fn is_valid(&self, p: Pixel) -> bool {
        self.get(p).is_some()
    }

    /// Writes a 16-bit grayscale PNG; values are rounded and saturated to `u16`.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let img: ImageBuffer<Luma<u16>, Vec<u16>> =
            ImageBuffer::from_fn(self.width as u32, self.height as u32, |x, y| {
                let i = y as usize * self.width + x as usize;
                let v = if self.valid[i] { self.data[i] } else { 0.0 };
                Luma([v.round().clamp(0.0, f32::from(u16::MAX)) as u16])
            });
        img.save(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// Reads a 16-bit single-channel PNG, or a text grid (`width height` header
/// followed by `height` rows of `width` numbers) for any other extension.
pub fn load_depth(path: &Path) -> Result<DepthMap> {
    let is_png = path
        .extension()
        .and_then(|e| e.to_str())
        .is_some_and(|e| e.eq_ignore_ascii_case("png"));
    if is_png {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        let DynamicImage::ImageLuma16(buf) = img else {
            return Err(Error::UnsupportedFormat(format!(
                "{}: depth images must be 16-bit single channel, got {:?}",
                path.display(),
                img.color()
            )));
        };
        let (w, h) = (buf.width() as usize, buf.height() as usize);
        return DepthMap::from_raw(w, h, buf.into_raw().into_iter().map(f32::from).collect());
    }
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_depth_grid(&text)
}

pub fn parse_depth_grid(text: &str) -> Result<DepthMap> {
    let mut tokens = text.split_whitespace();
    let mut dim = |name: &str| -> Result<usize> {
        let tok = tokens
            .next()
            .ok_or_else(|| Error::DepthGrid(format!("missing {name} in header")))?;
        let v: i64 = tok
            .parse()
            .map_err(|_| Error::DepthGrid(format!("bad {name} {tok:?}")))?;
        if v <= 0 {
            return Err(Error::DepthGrid(format!("{name} must be positive, got {v}")));
        }
        Ok(v as usize)
    };
    let width = dim("width")?;
    let height = dim("height")?;
    let values = tokens
        .map(|t| {
            t.parse::<f32>()
                .map_err(|_| Error::DepthGrid(format!("bad depth value {t:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    DepthMap::from_raw(width, height, values)
}

/// Frame-level metadata carried by a [`CurveDocument`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub width: usize,
    pub height: usize,
    pub source: String,
    pub elapsed_ms: f64,
}

/// One fitted curve in serialized form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveInstance {
    pub degree: usize,
    pub knots: Vec<f64>,
    pub control_points: Vec<Vec<f64>>,
    pub t_range: [f64; 2],
}

/// Per-frame tracking output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveDocument {
    pub frame: FrameMeta,
    pub instances: Vec<CurveInstance>,
}

impl CurveInstance {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Curve(msg));
        if self.degree != 3 {
            return bad(format!("degree {} != 3", self.degree));
        }
        let order = self.degree + 1;
        if self.knots.len() < 2 * order {
            return bad(format!("{} knots, need at least {}", self.knots.len(), 2 * order));
        }
        if self.knots.windows(2).any(|w| !(w[0] <= w[1])) {
            return bad("knots must be non-decreasing".into());
        }
        let n = self.knots.len();
        let first = self.knots[0];
        let last = self.knots[n - 1];
        let lead = self.knots.iter().take_while(|&&k| k == first).count();
        let trail = self.knots.iter().rev().take_while(|&&k| k == last).count();
        if lead != order || trail != order {
            return bad(format!("end knot multiplicities {lead}/{trail}, expected {order}"));
        }
        if self.control_points.len() != n - order {
            return bad(format!(
                "{} control points for {} knots",
                self.control_points.len(),
                n
            ));
        }
        let dim = self.control_points[0].len();
        if !(dim == 2 || dim == 3) || self.control_points.iter().any(|c| c.len() != dim) {
            return bad("control points must all be 2D or all be 3D".into());
        }
        if self.t_range != [first, last] {
            return bad("t_range must equal the clamped end knots".into());
        }
        Ok(())
    }
}

impl CurveDocument {
    pub fn validate(&self) -> Result<()> {
        self.instances.iter().try_for_each(CurveInstance::validate)
    }

    /// Canonical JSON text. Floats use shortest round-trip formatting, so
    /// parsing the text back gives bit-identical values.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|source| Error::Json {
            path: "<memory>".into(),
            source,
        })
    }
}

pub fn write_curves(doc: &CurveDocument, path: &Path) -> Result<()> {
    doc.validate()?;
    let text = doc.to_json()?;
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_curves(path: &Path) -> Result<CurveDocument> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let doc: CurveDocument = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    doc.validate()?;
    Ok(doc)
}
