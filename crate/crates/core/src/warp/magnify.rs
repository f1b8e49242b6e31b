use super::{BackwardMap, NonseparableWarp, SeparableWarp};
use crate::error::{Axis, FoveaError, Result};
use crate::geometry::{pixel_center, Point};

/// Per-output-pixel area ratio: output pixels per source pixel.
#[derive(Clone, Debug, PartialEq)]
pub struct MagnificationMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl MagnificationMap {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.width + i]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Source pixels covered by the whole output, `sum(1 / mag)`.
    pub fn source_area(&self) -> f64 {
        self.values.iter().map(|m| 1.0 / m).sum()
    }

    /// 16-bit fixed-point encoding `round(mag * 4096)`, saturating.
    pub fn to_fixed_u16(&self) -> Vec<u16> {
        self.values
            .iter()
            .map(|m| (m * 4096.0).round().clamp(0.0, u16::MAX as f64) as u16)
            .collect()
    }
}

/// One non-increasing step of a sampled backward map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub axis: Axis,
    /// Index of the first sample of the offending pair (row-major for 2D maps).
    pub index: usize,
    pub delta: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FoldoverReport {
    pub monotone: bool,
    pub violations: Vec<Violation>,
}

impl FoldoverReport {
    fn from_violations(violations: Vec<Violation>) -> Self {
        Self {
            monotone: violations.is_empty(),
            violations,
        }
    }

    /// The first violation as an error.
    pub fn into_result(self) -> Result<()> {
        match self.violations.first() {
            None => Ok(()),
            Some(v) => Err(FoveaError::Foldover {
                axis: v.axis,
                index: v.index,
                delta: v.delta,
            }),
        }
    }
}

pub fn compute_magnification_map<W: BackwardMap + ?Sized>(warp: &W) -> Result<MagnificationMap> {
    warp.magnification()
}

pub fn check_foldover<W: BackwardMap + ?Sized>(warp: &W) -> FoldoverReport {
    warp.foldover()
}

/// Output pixels per source pixel along one axis, from the backward map
/// evaluated at both edges of every output pixel.
fn axis_scale(warp: &SeparableWarp, axis: Axis, src: usize) -> Result<Vec<f64>> {
    let map = warp.axis_map(axis);
    let n = warp.samples(axis).len();
    (0..n)
        .map(|i| {
            let lo = map.eval(i as f64 / n as f64);
            let hi = map.eval((i + 1) as f64 / n as f64);
            let delta = hi - lo;
            if delta > 0.0 {
                Ok(1.0 / (delta * src as f64))
            } else {
                Err(FoveaError::Foldover {
                    axis,
                    index: i,
                    delta,
                })
            }
        })
        .collect()
}

pub(super) fn separable_magnification(warp: &SeparableWarp) -> Result<MagnificationMap> {
    // edge differences can stay positive across a fold between pixel centers
    separable_foldover(warp).into_result()?;
    let d = warp.dims();
    let mx = axis_scale(warp, Axis::X, d.src_w)?;
    let my = axis_scale(warp, Axis::Y, d.src_h)?;
    let values = my
        .iter()
        .flat_map(|&sy| mx.iter().map(move |&sx| sx * sy))
        .collect();
    Ok(MagnificationMap {
        width: d.out_w,
        height: d.out_h,
        values,
    })
}

pub(super) fn nonseparable_magnification(warp: &NonseparableWarp) -> Result<MagnificationMap> {
    nonseparable_foldover(warp).into_result()?;
    let d = warp.dims();
    let (hx, hy) = (0.5 / d.out_w as f64, 0.5 / d.out_h as f64);
    let (sw, sh) = (d.src_w as f64, d.src_h as f64);
    let mut values = Vec::with_capacity(d.out_w * d.out_h);
    for j in 0..d.out_h {
        let cy = pixel_center(j, d.out_h);
        for i in 0..d.out_w {
            let cx = pixel_center(i, d.out_w);
            let l = warp.eval(Point::new(cx - hx, cy));
            let r = warp.eval(Point::new(cx + hx, cy));
            let t = warp.eval(Point::new(cx, cy - hy));
            let b = warp.eval(Point::new(cx, cy + hy));
            // source pixels per output pixel
            let (a, bb) = ((r.x - l.x) * sw, (b.x - t.x) * sw);
            let (c, dd) = ((r.y - l.y) * sh, (b.y - t.y) * sh);
            let det = a * dd - bb * c;
            if !(det > 0.0) {
                let axis = if a <= 0.0 || dd > 0.0 {
                    Axis::X
                } else {
                    Axis::Y
                };
                return Err(FoveaError::Foldover {
                    axis,
                    index: j * d.out_w + i,
                    delta: det,
                });
            }
            values.push(1.0 / det);
        }
    }
    Ok(MagnificationMap {
        width: d.out_w,
        height: d.out_h,
        values,
    })
}

fn steps(samples: &[f64], axis: Axis, index: impl Fn(usize) -> usize) -> Vec<Violation> {
    samples
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let delta = w[1] - w[0];
            (!(delta > 0.0)).then(|| Violation {
                axis,
                index: index(i),
                delta,
            })
        })
        .collect()
}

pub(super) fn separable_foldover(warp: &SeparableWarp) -> FoldoverReport {
    let mut v = steps(warp.tinv_x(), Axis::X, |i| i);
    v.extend(steps(warp.tinv_y(), Axis::Y, |i| i));
    FoldoverReport::from_violations(v)
}

pub(super) fn nonseparable_foldover(warp: &NonseparableWarp) -> FoldoverReport {
    let d = warp.dims();
    let mut v = Vec::new();
    for j in 0..d.out_h {
        let row: Vec<f64> = (0..d.out_w).map(|i| warp.at(i, j).x).collect();
        v.extend(steps(&row, Axis::X, |i| j * d.out_w + i));
    }
    for i in 0..d.out_w {
        let col: Vec<f64> = (0..d.out_h).map(|j| warp.at(i, j).y).collect();
        v.extend(steps(&col, Axis::Y, |j| j * d.out_w + i));
    }
    FoldoverReport::from_violations(v)
}
