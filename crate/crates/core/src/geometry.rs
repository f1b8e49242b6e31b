//! Raster and box types plus the bilinear sampler.
//!
//! Coordinates are normalized: 0 is the left/top edge, 1 the right/bottom
//! edge, and pixel `i` of an `n`-pixel axis has its center at `(i + 0.5) / n`.

use crate::error::{FoveaError, Result};
use crate::exec::{for_each_row, Execution};

/// Dense row-major raster of float channels in `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f32>,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f32>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(FoveaError::InvalidImage(format!(
                "dimensions must be positive, got {width}x{height}"
            )));
        }
        if !(1..=4).contains(&channels) {
            return Err(FoveaError::InvalidImage(format!(
                "channel count must be 1-4, got {channels}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(FoveaError::InvalidImage(format!(
                "data length {} != {width}*{height}*{channels}",
                data.len()
            )));
        }
        if let Some(i) = data
            .iter()
            .position(|v| !v.is_finite() || *v < 0.0 || *v > 1.0)
        {
            return Err(FoveaError::InvalidImage(format!(
                "value {} at index {i} outside [0, 1]",
                data[i]
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Constant image.
    pub fn filled(width: usize, height: usize, channels: usize, value: f32) -> Result<Self> {
        Self::new(
            width,
            height,
            channels,
            vec![value; width * height * channels],
        )
    }

    /// Converts 8-bit samples to floats in `[0, 1]`.
    pub fn from_u8(width: usize, height: usize, channels: usize, bytes: &[u8]) -> Result<Self> {
        let data = bytes.iter().map(|&b| b as f32 / 255.0).collect();
        Self::new(width, height, channels, data)
    }

    /// Quantizes to 8 bits, rounding half away from zero.
    pub fn to_u8(&self) -> Vec<u8> {
        self.data.iter().map(|&v| quantize_u8(v)).collect()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> f32 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    fn pixel(&self, x: usize, y: usize) -> &[f32] {
        let base = (y * self.width + x) * self.channels;
        &self.data[base..base + self.channels]
    }
}

#[inline]
pub fn quantize_u8(v: f32) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Continuous normalized coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Center of pixel `(i, j)` on a `w`x`h` raster.
    pub fn pixel_center(i: usize, j: usize, w: usize, h: usize) -> Self {
        Self {
            x: pixel_center(i, w),
            y: pixel_center(j, h),
        }
    }
}

#[inline]
pub fn pixel_center(i: usize, n: usize) -> f64 {
    (i as f64 + 0.5) / n as f64
}

/// Which side of the warp a box lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Space {
    Original,
    Warped,
}

/// Axis-aligned box in normalized coordinates.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BBox {
    pub x1: f64,
    pub y1: f64,
    pub x2: f64,
    pub y2: f64,
    pub space: Space,
}

impl BBox {
    pub fn new(x1: f64, y1: f64, x2: f64, y2: f64, space: Space) -> Result<Self> {
        let finite = [x1, y1, x2, y2].iter().all(|v| v.is_finite());
        if !finite || x1 >= x2 || y1 >= y2 {
            return Err(FoveaError::InvalidBox { x1, y1, x2, y2 });
        }
        Ok(Self {
            x1,
            y1,
            x2,
            y2,
            space,
        })
    }

    /// Builds a box from pixel `[x, y, w, h]` on a `image_w`x`image_h` frame.
    pub fn from_pixel_xywh(
        xywh: [f64; 4],
        image_w: usize,
        image_h: usize,
        space: Space,
    ) -> Result<Self> {
        let (w, h) = (image_w as f64, image_h as f64);
        let [x, y, bw, bh] = xywh;
        Self::new(x / w, y / h, (x + bw) / w, (y + bh) / h, space)
    }

    pub fn width(&self) -> f64 {
        self.x2 - self.x1
    }

    pub fn height(&self) -> f64 {
        self.y2 - self.y1
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> Point {
        Point::new(0.5 * (self.x1 + self.x2), 0.5 * (self.y1 + self.y2))
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self {
            x1: self.x1 + dx,
            y1: self.y1 + dy,
            x2: self.x2 + dx,
            y2: self.y2 + dy,
            space: self.space,
        }
    }
}

/// Boxes with optional parallel scores and class ids, all in one space.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectionSet {
    boxes: Vec<BBox>,
    scores: Option<Vec<f64>>,
    class_ids: Option<Vec<i64>>,
}

impl DetectionSet {
    pub fn empty() -> Self {
        Self {
            boxes: Vec::new(),
            scores: None,
            class_ids: None,
        }
    }

    pub fn new(
        boxes: Vec<BBox>,
        scores: Option<Vec<f64>>,
        class_ids: Option<Vec<i64>>,
    ) -> Result<Self> {
        if let Some(first) = boxes.first() {
            if let Some(b) = boxes.iter().find(|b| b.space != first.space) {
                return Err(FoveaError::SpaceMismatch {
                    expected: first.space,
                    found: b.space,
                });
            }
        }
        if let Some(s) = &scores {
            if s.len() != boxes.len() {
                return Err(FoveaError::InvalidDetections(format!(
                    "{} scores for {} boxes",
                    s.len(),
                    boxes.len()
                )));
            }
            if s.iter().any(|v| !(0.0..=1.0).contains(v)) {
                return Err(FoveaError::InvalidDetections(
                    "scores must lie in [0, 1]".into(),
                ));
            }
        }
        if let Some(c) = &class_ids {
            if c.len() != boxes.len() {
                return Err(FoveaError::InvalidDetections(format!(
                    "{} class ids for {} boxes",
                    c.len(),
                    boxes.len()
                )));
            }
        }
        Ok(Self {
            boxes,
            scores,
            class_ids,
        })
    }

    pub fn from_boxes(boxes: Vec<BBox>) -> Result<Self> {
        Self::new(boxes, None, None)
    }

    pub fn boxes(&self) -> &[BBox] {
        &self.boxes
    }

    /// Score of box `i`; 1.0 when no scores were supplied.
    pub fn score(&self, i: usize) -> f64 {
        self.scores.as_ref().map_or(1.0, |s| s[i])
    }

    pub fn scores(&self) -> Option<&[f64]> {
        self.scores.as_deref()
    }

    pub fn class_ids(&self) -> Option<&[i64]> {
        self.class_ids.as_deref()
    }

    pub fn len(&self) -> usize {
        self.boxes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Shared space tag; `None` for an empty set.
    pub fn space(&self) -> Option<Space> {
        self.boxes.first().map(|b| b.space)
    }

    /// Same scores and ids with replaced boxes.
    pub(crate) fn with_boxes(&self, boxes: Vec<BBox>) -> Self {
        debug_assert_eq!(boxes.len(), self.boxes.len());
        Self {
            boxes,
            scores: self.scores.clone(),
            class_ids: self.class_ids.clone(),
        }
    }
}

/// Interpolation taps along one axis: left index, right index, right weight.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Tap {
    lo: usize,
    hi: usize,
    t: f64,
}

#[inline]
pub(crate) fn tap(coord: f64, n: usize) -> Tap {
    let f = (coord * n as f64 - 0.5).clamp(0.0, (n - 1) as f64);
    let lo = f.floor() as usize;
    let lo = lo.min(n - 1);
    let hi = (lo + 1).min(n - 1);
    Tap {
        lo,
        hi,
        t: f - lo as f64,
    }
}

#[inline]
fn blend(img: &ImageBuffer, tx: Tap, ty: Tap, out: &mut [f32]) {
    let a = img.pixel(tx.lo, ty.lo);
    let b = img.pixel(tx.hi, ty.lo);
    let c = img.pixel(tx.lo, ty.hi);
    let d = img.pixel(tx.hi, ty.hi);
    let (wx, wy) = (tx.t, ty.t);
    for k in 0..out.len() {
        let top = (1.0 - wx) * a[k] as f64 + wx * b[k] as f64;
        let bottom = (1.0 - wx) * c[k] as f64 + wx * d[k] as f64;
        out[k] = ((1.0 - wy) * top + wy * bottom) as f32;
    }
}

/// Bilinear interpolation of the four pixel centers around `p`.
///
/// Points outside `[0, 1]` are clamped to the nearest edge pixel center.
pub fn sample_bilinear(img: &ImageBuffer, p: Point) -> Vec<f32> {
    let mut out = vec![0.0; img.channels];
    blend(img, tap(p.x, img.width), tap(p.y, img.height), &mut out);
    out
}

/// Resamples at the cartesian product of per-column `xs` and per-row `ys`.
pub(crate) fn resample_separable(
    img: &ImageBuffer,
    xs: &[f64],
    ys: &[f64],
    exec: Execution,
) -> ImageBuffer {
    let (out_w, out_h, ch) = (xs.len(), ys.len(), img.channels);
    let col_taps: Vec<Tap> = xs.iter().map(|&x| tap(x, img.width)).collect();
    let mut data = vec![0.0f32; out_w * out_h * ch];
    for_each_row(&mut data, out_w * ch, exec, |j, row| {
        let ty = tap(ys[j], img.height);
        for (i, tx) in col_taps.iter().enumerate() {
            blend(img, *tx, ty, &mut row[i * ch..(i + 1) * ch]);
        }
    });
    ImageBuffer {
        width: out_w,
        height: out_h,
        channels: ch,
        data,
    }
}

/// Resamples at an arbitrary row-major grid of source points.
pub(crate) fn resample_points(
    img: &ImageBuffer,
    points: &[Point],
    out_w: usize,
    out_h: usize,
    exec: Execution,
) -> ImageBuffer {
    debug_assert_eq!(points.len(), out_w * out_h);
    let ch = img.channels;
    let mut data = vec![0.0f32; out_w * out_h * ch];
    for_each_row(&mut data, out_w * ch, exec, |j, row| {
        for i in 0..out_w {
            let p = points[j * out_w + i];
            blend(
                img,
                tap(p.x, img.width),
                tap(p.y, img.height),
                &mut row[i * ch..(i + 1) * ch],
            );
        }
    });
    ImageBuffer {
        width: out_w,
        height: out_h,
        channels: ch,
        data,
    }
}

/// Pixel-center coordinates of an `n`-pixel axis.
pub fn pixel_centers(n: usize) -> Vec<f64> {
    (0..n).map(|i| pixel_center(i, n)).collect()
}

/// Bilinear resize sampling at output pixel centers.
pub fn uniform_downsample(img: &ImageBuffer, out_w: usize, out_h: usize) -> Result<ImageBuffer> {
    uniform_downsample_with(img, out_w, out_h, Execution::default())
}

pub fn uniform_downsample_with(
    img: &ImageBuffer,
    out_w: usize,
    out_h: usize,
    exec: Execution,
) -> Result<ImageBuffer> {
    if out_w == 0 || out_h == 0 {
        return Err(FoveaError::InvalidParameter(format!(
            "output dimensions must be positive, got {out_w}x{out_h}"
        )));
    }
    Ok(resample_separable(
        img,
        &pixel_centers(out_w),
        &pixel_centers(out_h),
        exec,
    ))
}
