//! Saliency-guided image magnification for detection pipelines.
//!
//! Boxes (a dataset prior or the previous frame's detections) become a KDE
//! saliency grid. The grid drives a separable backward map that magnifies
//! salient regions while keeping the canvas edges fixed. Images are warped
//! through that map, and boxes predicted on the warped image are mapped back
//! to the original frame with the same map.
//!
//! ```
//! use fovea::geometry::{BBox, DetectionSet, Space};
//! use fovea::saliency::{kde_saliency, normalize_and_marginalize, GridSpec, KdeParams};
//! use fovea::warp::{build_separable_backward_map, AttractionKernel, WarpDims};
//!
//! let prev = DetectionSet::from_boxes(vec![
//!     BBox::new(0.45, 0.45, 0.50, 0.52, Space::Original).unwrap(),
//! ]).unwrap();
//! let grid = kde_saliency(&prev, &KdeParams::default(), GridSpec::new(31, 51, 1920, 1200)).unwrap();
//! let (sx, sy) = normalize_and_marginalize(&grid).unwrap();
//! let warp = build_separable_backward_map(
//!     &sx, &sy, &AttractionKernel::default(), WarpDims::new(1920, 1200, 960, 600), true,
//! ).unwrap();
//! assert!(warp.edges_x()[0].abs() < 1e-9);
//! ```

// `!(x > 0.0)` is used deliberately so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod geometry;
pub mod label_map;
pub mod pipeline;
pub mod saliency;
pub mod warp;

pub use error::{Axis, FoveaError, Result};
pub use exec::Execution;
