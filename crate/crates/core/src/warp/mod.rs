//! Saliency-driven backward maps and the image warps built on them.
//!
//! A backward map sends every output pixel center to the source point it is
//! sampled from. Salient cells attract samples, so their neighbourhood
//! occupies more output pixels. Reflect padding of the saliency pins the
//! canvas edges in place so nothing is cropped.

mod axis;
mod kernel;
mod magnify;
mod nonseparable;
mod separable;

pub use axis::PiecewiseLinear;
pub use kernel::{reflect_pad_profile, AttractionKernel, DEFAULT_SIGMA, DEFAULT_SIGMA_FRACTION};
pub use magnify::{
    check_foldover, compute_magnification_map, FoldoverReport, MagnificationMap, Violation,
};
pub use nonseparable::{build_nonseparable_backward_map, NonseparableWarp};
pub use separable::{build_separable_backward_map, SeparableWarp};

use crate::error::{FoveaError, Result};
use crate::exec::Execution;
use crate::geometry::{resample_points, resample_separable, ImageBuffer};

/// Source and output raster sizes of a warp, in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WarpDims {
    pub src_w: usize,
    pub src_h: usize,
    pub out_w: usize,
    pub out_h: usize,
}

impl WarpDims {
    pub fn new(src_w: usize, src_h: usize, out_w: usize, out_h: usize) -> Self {
        Self {
            src_w,
            src_h,
            out_w,
            out_h,
        }
    }

    /// Output scaled by `scale` (rounded, at least one pixel).
    pub fn scaled(src_w: usize, src_h: usize, scale: f64) -> Self {
        let out = |n: usize| ((n as f64 * scale).round() as usize).max(1);
        Self::new(src_w, src_h, out(src_w), out(src_h))
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.src_w == 0 || self.src_h == 0 || self.out_w == 0 || self.out_h == 0 {
            return Err(FoveaError::InvalidParameter(format!(
                "warp dimensions must be positive: {self:?}"
            )));
        }
        Ok(())
    }
}

/// Anything that can render a warped image from a source image.
pub trait BackwardMap {
    fn dims(&self) -> WarpDims;

    /// Samples `img` at the backward coordinate of every output pixel center.
    fn resample(&self, img: &ImageBuffer, exec: Execution) -> ImageBuffer;

    fn magnification(&self) -> Result<MagnificationMap>;

    fn foldover(&self) -> FoldoverReport;
}

impl BackwardMap for SeparableWarp {
    fn dims(&self) -> WarpDims {
        SeparableWarp::dims(self)
    }

    fn resample(&self, img: &ImageBuffer, exec: Execution) -> ImageBuffer {
        resample_separable(img, self.tinv_x(), self.tinv_y(), exec)
    }

    fn magnification(&self) -> Result<MagnificationMap> {
        magnify::separable_magnification(self)
    }

    fn foldover(&self) -> FoldoverReport {
        magnify::separable_foldover(self)
    }
}

impl BackwardMap for NonseparableWarp {
    fn dims(&self) -> WarpDims {
        NonseparableWarp::dims(self)
    }

    fn resample(&self, img: &ImageBuffer, exec: Execution) -> ImageBuffer {
        let d = NonseparableWarp::dims(self);
        resample_points(img, self.grid(), d.out_w, d.out_h, exec)
    }

    fn magnification(&self) -> Result<MagnificationMap> {
        magnify::nonseparable_magnification(self)
    }

    fn foldover(&self) -> FoldoverReport {
        magnify::nonseparable_foldover(self)
    }
}

/// `output(i, j) = sample_bilinear(img, T^-1(center of (i, j)))`.
pub fn warp_image<W: BackwardMap + ?Sized>(img: &ImageBuffer, warp: &W) -> Result<ImageBuffer> {
    warp_image_with(img, warp, Execution::default())
}

pub fn warp_image_with<W: BackwardMap + ?Sized>(
    img: &ImageBuffer,
    warp: &W,
    exec: Execution,
) -> Result<ImageBuffer> {
    let d = warp.dims();
    if (d.src_w, d.src_h) != (img.width(), img.height()) {
        return Err(FoveaError::DimensionMismatch(format!(
            "warp expects a {}x{} source, image is {}x{}",
            d.src_w,
            d.src_h,
            img.width(),
            img.height()
        )));
    }
    Ok(warp.resample(img, exec))
}
