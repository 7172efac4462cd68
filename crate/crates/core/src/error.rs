use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: cannot decode image: {source}")]
    Image {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("{path}: invalid curve document: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("unsupported raster format: {0}")]
    UnsupportedFormat(String),

    #[error("raster is {width}x{height}, at least 3x3 is required")]
    TooSmall { width: usize, height: usize },

    #[error("raster data has {got} values, expected {expected}")]
    DataLength { expected: usize, got: usize },

    #[error("malformed depth grid: {0}")]
    DepthGrid(String),

    #[error("dimension mismatch: mask is {mask_w}x{mask_h}, depth is {depth_w}x{depth_h}")]
    DimensionMismatch {
        mask_w: usize,
        mask_h: usize,
        depth_w: usize,
        depth_h: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid curve: {0}")]
    Curve(String),

    #[error("insufficient data: {points} parameter values cannot carry {knots} interior knots")]
    InsufficientData { points: usize, knots: usize },

    #[error("collocation matrix is rank deficient")]
    RankDeficient,

    #[error("parameter {t} outside curve range [{min}, {max}]")]
    OutOfRange { t: f64, min: f64, max: f64 },

    #[error("chain has no valid depth samples")]
    NoDepthSupport,

    #[error("component is not a single cycle: {0}")]
    NotACycle(String),

    #[error("empty point set")]
    EmptyPointSet,

    #[error("degenerate zero-length curve")]
    DegenerateCurve,

    #[error("invalid scenario: {0}")]
    Scenario(String),
}
