use super::axis::{AxisOperator, PiecewiseLinear};
use super::kernel::AttractionKernel;
use super::WarpDims;
use crate::error::{FoveaError, Result};
use crate::geometry::{pixel_centers, Point};
use crate::saliency::SaliencyGrid2D;

/// Knot-level 2D backward map, bilinear between knots.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct KnotSurface {
    xs: PiecewiseLinear,
    ys: PiecewiseLinear,
    values: Vec<Point>,
}

impl KnotSurface {
    pub fn eval(&self, p: Point) -> Point {
        let nx = self.xs.xs().len();
        let (i, tx) = self.xs.locate(p.x);
        let (j, ty) = self.ys.locate(p.y);
        let at = |a: usize, b: usize| self.values[b * nx + a];
        let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i, j + 1), at(i + 1, j + 1));
        let lerp = |u: f64, v: f64, t: f64| u + t * (v - u);
        Point::new(
            lerp(lerp(a.x, b.x, tx), lerp(c.x, d.x, tx), ty),
            lerp(lerp(a.y, b.y, tx), lerp(c.y, d.y, tx), ty),
        )
    }
}

/// General (non-separable) backward map sampled at every output pixel center.
#[derive(Clone, Debug, PartialEq)]
pub struct NonseparableWarp {
    grid: Vec<Point>,
    dims: WarpDims,
    surface: KnotSurface,
}

impl NonseparableWarp {
    pub fn dims(&self) -> WarpDims {
        self.dims
    }

    /// Row-major `out_h x out_w` source coordinates.
    pub fn grid(&self) -> &[Point] {
        &self.grid
    }

    pub fn at(&self, i: usize, j: usize) -> Point {
        self.grid[j * self.dims.out_w + i]
    }

    /// Backward map at any normalized output point.
    pub fn eval(&self, p: Point) -> Point {
        let q = self.surface.eval(p);
        Point::new(q.x.clamp(0.0, 1.0), q.y.clamp(0.0, 1.0))
    }
}

/// 2D attraction-weighted mean with a product Gaussian kernel, computed at
/// knot resolution and bilinearly interpolated to output pixel centers.
pub fn build_nonseparable_backward_map(
    s: &SaliencyGrid2D,
    kernel: &AttractionKernel,
    dims: WarpDims,
    anti_crop: bool,
) -> Result<NonseparableWarp> {
    dims.validate()?;
    if !(s.sum() > 0.0) {
        return Err(FoveaError::DegenerateSaliency(
            "saliency grid has no positive mass".into(),
        ));
    }
    let (rows, cols) = (s.rows(), s.cols());
    let ox = AxisOperator::new(cols, kernel, anti_crop);
    let oy = AxisOperator::new(rows, kernel, anti_crop);
    let (kx, ky) = (cols + 2, rows + 2);

    // pass 1: along x for every source row
    let mut mass = vec![0.0; rows * kx];
    let mut moment_x = vec![0.0; rows * kx];
    for r in 0..rows {
        for k in 0..kx {
            let (mut m, mut mx) = (0.0, 0.0);
            for t in ox.terms(k) {
                let w = t.weight * s.get(r, t.cell);
                m += w;
                mx += w * t.coord;
            }
            mass[r * kx + k] = m;
            moment_x[r * kx + k] = mx;
        }
    }

    // pass 2: along y
    let mut values = Vec::with_capacity(kx * ky);
    for j in 0..ky {
        for k in 0..kx {
            let (mut den, mut nx, mut ny) = (0.0, 0.0, 0.0);
            for t in oy.terms(j) {
                let m = t.weight * mass[t.cell * kx + k];
                den += m;
                nx += t.weight * moment_x[t.cell * kx + k];
                ny += m * t.coord;
            }
            if !(den > 0.0) {
                return Err(FoveaError::DegenerateSaliency(format!(
                    "no saliency within kernel reach of knot ({k}, {j})"
                )));
            }
            values.push(Point::new(nx / den, ny / den));
        }
    }

    let surface = KnotSurface {
        xs: PiecewiseLinear::new(ox.knots().to_vec(), vec![0.0; kx])?,
        ys: PiecewiseLinear::new(oy.knots().to_vec(), vec![0.0; ky])?,
        values,
    };
    let cx = pixel_centers(dims.out_w);
    let cy = pixel_centers(dims.out_h);
    let mut grid = Vec::with_capacity(dims.out_w * dims.out_h);
    for &y in &cy {
        for &x in &cx {
            let q = surface.eval(Point::new(x, y));
            grid.push(Point::new(q.x.clamp(0.0, 1.0), q.y.clamp(0.0, 1.0)));
        }
    }
    Ok(NonseparableWarp {
        grid,
        dims,
        surface,
    })
}
