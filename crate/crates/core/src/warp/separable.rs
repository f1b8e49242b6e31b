use super::axis::{AxisOperator, PiecewiseLinear};
use super::kernel::AttractionKernel;
use super::WarpDims;
use crate::error::{Axis, FoveaError, Result};
use crate::geometry::pixel_centers;
use crate::saliency::SaliencyProfile1D;

/// Backward map `T^-1(x, y) = (T^-1_x(x), T^-1_y(y))` sampled at output
/// pixel centers, plus its values at the two canvas edges of each axis.
#[derive(Clone, Debug, PartialEq)]
pub struct SeparableWarp {
    tinv_x: Vec<f64>,
    tinv_y: Vec<f64>,
    edges_x: [f64; 2],
    edges_y: [f64; 2],
    dims: WarpDims,
}

impl SeparableWarp {
    /// Maps every output pixel center onto the same normalized source point.
    pub fn identity(dims: WarpDims) -> Result<Self> {
        dims.validate()?;
        Ok(Self {
            tinv_x: pixel_centers(dims.out_w),
            tinv_y: pixel_centers(dims.out_h),
            edges_x: [0.0, 1.0],
            edges_y: [0.0, 1.0],
            dims,
        })
    }

    /// Wraps externally sampled axis maps; lengths must match the output size.
    pub fn from_samples(
        tinv_x: Vec<f64>,
        tinv_y: Vec<f64>,
        edges_x: [f64; 2],
        edges_y: [f64; 2],
        dims: WarpDims,
    ) -> Result<Self> {
        dims.validate()?;
        if tinv_x.len() != dims.out_w || tinv_y.len() != dims.out_h {
            return Err(FoveaError::DimensionMismatch(format!(
                "axis maps of length {}x{} for a {}x{} output",
                tinv_x.len(),
                tinv_y.len(),
                dims.out_w,
                dims.out_h
            )));
        }
        let all = tinv_x.iter().chain(&tinv_y).chain(&edges_x).chain(&edges_y);
        if all.clone().any(|v| !v.is_finite()) {
            return Err(FoveaError::InvalidParameter(
                "backward map contains non-finite values".into(),
            ));
        }
        Ok(Self {
            tinv_x,
            tinv_y,
            edges_x,
            edges_y,
            dims,
        })
    }

    pub fn tinv_x(&self) -> &[f64] {
        &self.tinv_x
    }

    pub fn tinv_y(&self) -> &[f64] {
        &self.tinv_y
    }

    /// `[T^-1_x(0), T^-1_x(1)]`.
    pub fn edges_x(&self) -> [f64; 2] {
        self.edges_x
    }

    pub fn edges_y(&self) -> [f64; 2] {
        self.edges_y
    }

    pub fn dims(&self) -> WarpDims {
        self.dims
    }

    pub fn samples(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.tinv_x,
            Axis::Y => &self.tinv_y,
        }
    }

    /// The axis map as a continuous function of the normalized output
    /// coordinate: linear between pixel centers, anchored at both edges.
    pub fn axis_map(&self, axis: Axis) -> PiecewiseLinear {
        let (samples, edges) = match axis {
            Axis::X => (&self.tinv_x, self.edges_x),
            Axis::Y => (&self.tinv_y, self.edges_y),
        };
        let n = samples.len();
        let xs = std::iter::once(0.0)
            .chain(pixel_centers(n))
            .chain(std::iter::once(1.0))
            .collect();
        let ys = std::iter::once(edges[0])
            .chain(samples.iter().copied())
            .chain(std::iter::once(edges[1]))
            .collect();
        PiecewiseLinear::new(xs, ys).expect("pixel centers are strictly increasing")
    }
}

/// Grid-level axis map: values at `[0, cell centers..., 1]`.
pub(crate) fn axis_knot_map(
    s: &SaliencyProfile1D,
    kernel: &AttractionKernel,
    anti_crop: bool,
    axis: Axis,
) -> Result<PiecewiseLinear> {
    if !(s.sum() > 0.0) {
        return Err(FoveaError::DegenerateSaliency(format!(
            "{axis} profile has no positive mass"
        )));
    }
    let op = AxisOperator::new(s.len(), kernel, anti_crop);
    let ys = op.apply(s.values(), axis)?;
    PiecewiseLinear::new(op.knots().to_vec(), ys)
}

/// Samples a grid-level map at `n` output pixel centers and both edges,
/// clamped to `[0, 1]`.
fn sample_axis(map: &PiecewiseLinear, n: usize) -> (Vec<f64>, [f64; 2]) {
    let samples = pixel_centers(n)
        .into_iter()
        .map(|t| map.eval(t).clamp(0.0, 1.0))
        .collect();
    let edges = [map.eval(0.0).clamp(0.0, 1.0), map.eval(1.0).clamp(0.0, 1.0)];
    (samples, edges)
}

/// Attraction-weighted mean of cell coordinates along each axis, computed
/// at saliency-grid resolution and linearly interpolated to output pixels.
pub fn build_separable_backward_map(
    s_x: &SaliencyProfile1D,
    s_y: &SaliencyProfile1D,
    kernel: &AttractionKernel,
    dims: WarpDims,
    anti_crop: bool,
) -> Result<SeparableWarp> {
    dims.validate()?;
    let map_x = axis_knot_map(s_x, kernel, anti_crop, Axis::X)?;
    let map_y = axis_knot_map(s_y, kernel, anti_crop, Axis::Y)?;
    let (tinv_x, edges_x) = sample_axis(&map_x, dims.out_w);
    let (tinv_y, edges_y) = sample_axis(&map_y, dims.out_h);
    Ok(SeparableWarp {
        tinv_x,
        tinv_y,
        edges_x,
        edges_y,
        dims,
    })
}
