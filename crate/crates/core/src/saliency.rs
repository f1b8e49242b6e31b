//! Box-driven saliency: the KDE generator and the dataset, temporal, and
//! combined priors built from it.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FoveaError, Result};
use crate::geometry::{BBox, DetectionSet, Space};

pub const DEFAULT_ROWS: usize = 31;
pub const DEFAULT_COLS: usize = 51;

/// Low-resolution nonnegative 2D saliency, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SaliencyGrid2D {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl SaliencyGrid2D {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(FoveaError::InvalidParameter(format!(
                "saliency grid must be non-empty, got {rows}x{cols}"
            )));
        }
        if values.len() != rows * cols {
            return Err(FoveaError::DimensionMismatch(format!(
                "{} values for a {rows}x{cols} grid",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(FoveaError::InvalidParameter(format!(
                "saliency values must be finite and nonnegative, found {v}"
            )));
        }
        Ok(Self { rows, cols, values })
    }

    /// Normalized constant grid.
    pub fn uniform(rows: usize, cols: usize) -> Result<Self> {
        let n = (rows * cols) as f64;
        Self::new(rows, cols, vec![1.0 / n; rows * cols])
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.cols + c]
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Scales to unit sum.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.sum();
        if !(total > 0.0) {
            return Err(FoveaError::DegenerateSaliency(
                "saliency grid has no positive mass".into(),
            ));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            values: self.values.iter().map(|v| v / total).collect(),
        })
    }

    /// True when every cell holds the same value.
    pub fn is_constant(&self) -> bool {
        self.values.iter().all(|&v| v == self.values[0])
    }
}

/// Nonnegative 1D saliency along one axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SaliencyProfile1D {
    values: Vec<f64>,
}

impl SaliencyProfile1D {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(FoveaError::InvalidParameter(
                "saliency profile must be non-empty".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(FoveaError::InvalidParameter(format!(
                "saliency values must be finite and nonnegative, found {v}"
            )));
        }
        Ok(Self { values })
    }

    pub fn uniform(len: usize) -> Result<Self> {
        Self::new(vec![1.0 / len as f64; len])
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn normalized(&self) -> Result<Self> {
        let total = self.sum();
        if !(total > 0.0) {
            return Err(FoveaError::DegenerateSaliency(
                "saliency profile has no positive mass".into(),
            ));
        }
        Ok(Self {
            values: self.values.iter().map(|v| v / total).collect(),
        })
    }
}

/// KDE generator hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KdeParams {
    pub amplitude: f64,
    /// Pixels; covariance is `bandwidth * diag(w, h)`.
    pub bandwidth: f64,
    /// Trust in the temporal prior when blending with the dataset prior.
    pub alpha: f64,
    /// Attraction-kernel support in cells; the floor is `1 / kernel_size^2`.
    pub kernel_size: usize,
    /// Multiply each box's term by its detection score.
    pub score_weighted: bool,
}

impl Default for KdeParams {
    fn default() -> Self {
        Self {
            amplitude: 1.0,
            bandwidth: 64.0,
            alpha: 0.5,
            // support of the default sigma = 5.5 cell kernel: 2 * ceil(16.5) + 1
            kernel_size: 35,
            score_weighted: false,
        }
    }
}

impl KdeParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude > 0.0 && self.amplitude.is_finite()) {
            return Err(FoveaError::InvalidParameter(format!(
                "amplitude must be positive, got {}",
                self.amplitude
            )));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(FoveaError::InvalidParameter(format!(
                "bandwidth must be positive, got {}",
                self.bandwidth
            )));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(FoveaError::InvalidParameter(format!(
                "alpha must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.kernel_size == 0 {
            return Err(FoveaError::InvalidParameter(
                "kernel size must be at least 1".into(),
            ));
        }
        Ok(())
    }

    pub fn floor(&self) -> f64 {
        let k = self.kernel_size as f64;
        1.0 / (k * k)
    }
}

/// Grid layout for evaluating saliency over an image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub image_w: usize,
    pub image_h: usize,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize, image_w: usize, image_h: usize) -> Self {
        Self {
            rows,
            cols,
            image_w,
            image_h,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rows == 0 || self.cols == 0 || self.image_w == 0 || self.image_h == 0 {
            return Err(FoveaError::InvalidParameter(format!(
                "grid and image dimensions must be positive: {self:?}"
            )));
        }
        Ok(())
    }

    /// Pixel-space x of column `c`'s cell center.
    pub fn cell_x(&self, c: usize) -> f64 {
        (c as f64 + 0.5) / self.cols as f64 * self.image_w as f64
    }

    pub fn cell_y(&self, r: usize) -> f64 {
        (r as f64 + 0.5) / self.rows as f64 * self.image_h as f64
    }
}

/// Floor plus a sum of bivariate normal densities, one per box, evaluated
/// in original-image pixels at grid cell centers. Not normalized.
pub fn kde_saliency(
    boxes: &DetectionSet,
    params: &KdeParams,
    grid: GridSpec,
) -> Result<SaliencyGrid2D> {
    params.validate()?;
    grid.validate()?;
    if let Some(space) = boxes.space() {
        if space != Space::Original {
            return Err(FoveaError::SpaceMismatch {
                expected: Space::Original,
                found: space,
            });
        }
    }

    let (iw, ih) = (grid.image_w as f64, grid.image_h as f64);
    let mut values = vec![params.floor(); grid.rows * grid.cols];
    let mut gx = vec![0.0; grid.cols];
    let mut gy = vec![0.0; grid.rows];

    for (i, b) in boxes.boxes().iter().enumerate() {
        let (w, h) = (b.width() * iw, b.height() * ih);
        if !(w > 0.0 && h > 0.0) {
            return Err(FoveaError::InvalidParameter(format!(
                "box {i} has nonpositive size {w}x{h} px"
            )));
        }
        let (var_x, var_y) = (params.bandwidth * w, params.bandwidth * h);
        let c = b.center();
        let (cx, cy) = (c.x * iw, c.y * ih);
        let weight = if params.score_weighted {
            boxes.score(i)
        } else {
            1.0
        };
        let scale = params.amplitude * weight / (2.0 * PI * (var_x * var_y).sqrt());

        // the diagonal covariance factors the density into x and y terms
        for (col, g) in gx.iter_mut().enumerate() {
            let d = grid.cell_x(col) - cx;
            *g = (-0.5 * d * d / var_x).exp();
        }
        for (row, g) in gy.iter_mut().enumerate() {
            let d = grid.cell_y(row) - cy;
            *g = scale * (-0.5 * d * d / var_y).exp();
        }
        for (row, &wy) in gy.iter().enumerate() {
            let line = &mut values[row * grid.cols..(row + 1) * grid.cols];
            for (v, &wx) in line.iter_mut().zip(&gx) {
                *v += wy * wx;
            }
        }
    }
    SaliencyGrid2D::new(grid.rows, grid.cols, values)
}

/// Normalizes to unit mass, then returns the column-sum (x) and row-sum (y)
/// marginals.
pub fn normalize_and_marginalize(
    grid: &SaliencyGrid2D,
) -> Result<(SaliencyProfile1D, SaliencyProfile1D)> {
    let g = grid.normalized()?;
    let mut xs = vec![0.0; g.cols];
    let mut ys = vec![0.0; g.rows];
    for (r, y) in ys.iter_mut().enumerate() {
        for (c, x) in xs.iter_mut().enumerate() {
            let v = g.get(r, c);
            *x += v;
            *y += v;
        }
    }
    Ok((SaliencyProfile1D::new(xs)?, SaliencyProfile1D::new(ys)?))
}

/// KDE over every box of a training corpus. Computed offline and serialized.
pub fn dataset_prior(
    all_boxes: &DetectionSet,
    params: &KdeParams,
    grid: GridSpec,
) -> Result<SaliencyGrid2D> {
    kde_saliency(all_boxes, params, grid)
}

/// Saliency from the previous frame's detections; uniform on the first frame
/// or when nothing was detected.
pub fn temporal_prior(
    prev: Option<&DetectionSet>,
    params: &KdeParams,
    grid: GridSpec,
) -> Result<SaliencyGrid2D> {
    match prev {
        Some(d) if !d.is_empty() => kde_saliency(d, params, grid),
        _ => {
            grid.validate()?;
            SaliencyGrid2D::uniform(grid.rows, grid.cols)
        }
    }
}

/// `alpha * temporal + (1 - alpha) * dataset`, cellwise, on normalized grids.
pub fn combine_saliency(
    temporal: &SaliencyGrid2D,
    dataset: &SaliencyGrid2D,
    alpha: f64,
) -> Result<SaliencyGrid2D> {
    if temporal.rows != dataset.rows || temporal.cols != dataset.cols {
        return Err(FoveaError::DimensionMismatch(format!(
            "cannot combine {}x{} with {}x{}",
            temporal.rows, temporal.cols, dataset.rows, dataset.cols
        )));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(FoveaError::InvalidParameter(format!(
            "alpha must lie in [0, 1], got {alpha}"
        )));
    }
    for (name, g) in [("temporal", temporal), ("dataset", dataset)] {
        if (g.sum() - 1.0).abs() > 1e-6 {
            return Err(FoveaError::InvalidParameter(format!(
                "{name} saliency must be normalized (sum {})",
                g.sum()
            )));
        }
    }
    let values = temporal
        .values
        .iter()
        .zip(&dataset.values)
        .map(|(&si, &sd)| alpha * si + (1.0 - alpha) * sd)
        .collect();
    SaliencyGrid2D::new(temporal.rows, temporal.cols, values)
}

/// Translates every box by independent `U(-j, j)` pixel offsets in x and y.
///
/// Offsets are `j * u` with `u ~ U(-1, 1)` drawn from a seeded ChaCha stream,
/// so one seed yields the same direction pattern at every `j`. Boxes are not
/// clipped to the frame.
pub fn jitter_boxes(
    boxes: &DetectionSet,
    jitter_px: f64,
    seed: u64,
    image_w: usize,
    image_h: usize,
) -> Result<DetectionSet> {
    if !(jitter_px >= 0.0 && jitter_px.is_finite()) {
        return Err(FoveaError::InvalidParameter(format!(
            "jitter must be a nonnegative number of pixels, got {jitter_px}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let moved: Vec<BBox> = boxes
        .boxes()
        .iter()
        .map(|b| {
            let ux: f64 = rng.gen_range(-1.0..=1.0);
            let uy: f64 = rng.gen_range(-1.0..=1.0);
            b.translated(
                jitter_px * ux / image_w as f64,
                jitter_px * uy / image_h as f64,
            )
        })
        .collect();
    Ok(boxes.with_boxes(moved))
}
