//! dlotrack: B-spline tracking of deformable linear objects (cables, ropes,
//! hoses) from binary masks.
//!
//! A frame goes through five stages:
//!
//! 1. 3×3 morphological open to drop segmentation speckle ([`skeleton`])
//! 2. Zhang-Suen thinning and branch-point removal ([`skeleton`])
//! 3. pixel walks along every branch-free segment ([`walker`])
//! 4. short-segment filtering and greedy endpoint chaining by a mixed
//!    distance/orientation cost ([`chainer`])
//! 5. arc-length parameterization and cubic B-spline least squares ([`spline`])
//!
//! [`tracker`] wires the stages together with per-stage timing, optionally
//! lifting chains to 3D with an aligned depth map. [`metrics`] holds the
//! evaluation measures (mean minimal distance and the aligned Fréchet-style
//! L3) and [`synthgen`] renders reproducible synthetic scenes with ground
//! truth for end-to-end checks.

// `!(x > 0.0)` is used on purpose so NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chainer;
pub mod cli;
pub mod error;
pub mod mask_io;
pub mod metrics;
pub mod pixel;
pub mod skeleton;
pub mod spline;
pub mod synthgen;
pub mod tracker;
pub mod walker;

pub use chainer::{ChainLink, ChainerParams, EndpointDescriptor, PathEnd, SegmentChain};
pub use error::{Error, Result};
pub use mask_io::{BinaryMask, CurveDocument, CurveInstance, DepthMap, FrameMeta};
pub use metrics::DiscretizedCurve;
pub use pixel::{Pixel, PixelSet};
pub use skeleton::Skeleton;
pub use spline::{BSplineCurve, ParameterizedChain};
pub use tracker::{FrameResult, Stage, TrackerConfig};
pub use walker::PixelPath;
