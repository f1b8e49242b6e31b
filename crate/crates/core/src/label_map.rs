//! Box mapping between warped and original space, plus IoU and GIoU.
//!
//! Separable warps map each box edge independently, so boxes stay
//! axis-aligned in both directions. Unwarping evaluates the backward map
//! directly; forward warping inverts the monotone sampled map.

use crate::error::{Axis, FoveaError, Result};
use crate::geometry::{BBox, Space};
use crate::warp::{check_foldover, PiecewiseLinear, SeparableWarp};

/// A strictly increasing sampled axis map with edge anchors.
#[derive(Clone, Debug)]
pub struct AxisMapView {
    axis: Axis,
    map: PiecewiseLinear,
}

impl AxisMapView {
    pub fn new(warp: &SeparableWarp, axis: Axis) -> Result<Self> {
        Self::from_map(warp.axis_map(axis), axis)
    }

    /// Any monotone map given as knots `(output coordinate, source coordinate)`.
    pub fn from_knots(xs: Vec<f64>, ys: Vec<f64>, axis: Axis) -> Result<Self> {
        Self::from_map(PiecewiseLinear::new(xs, ys)?, axis)
    }

    fn from_map(map: PiecewiseLinear, axis: Axis) -> Result<Self> {
        if let Some((index, w)) = map
            .ys()
            .windows(2)
            .enumerate()
            .find(|(_, w)| !(w[1] > w[0]))
        {
            return Err(FoveaError::Foldover {
                axis,
                index,
                delta: w[1] - w[0],
            });
        }
        Ok(Self { axis, map })
    }

    /// Source coordinate of output coordinate `t`.
    pub fn backward(&self, t: f64) -> f64 {
        self.map.eval(t)
    }

    /// Output coordinate whose backward image is `c`.
    pub fn forward(&self, c: f64) -> Result<f64> {
        let ys = self.map.ys();
        self.map.invert(c).ok_or(FoveaError::OutOfRange {
            axis: self.axis,
            value: c,
            lo: ys[0],
            hi: ys[ys.len() - 1],
        })
    }
}

/// Reusable box mapper for one separable warp.
#[derive(Clone, Debug)]
pub struct BoxMapper {
    x: AxisMapView,
    y: AxisMapView,
}

impl BoxMapper {
    pub fn new(warp: &SeparableWarp) -> Result<Self> {
        check_foldover(warp).into_result()?;
        Ok(Self {
            x: AxisMapView::new(warp, Axis::X)?,
            y: AxisMapView::new(warp, Axis::Y)?,
        })
    }

    pub fn x(&self) -> &AxisMapView {
        &self.x
    }

    pub fn y(&self) -> &AxisMapView {
        &self.y
    }

    pub fn unwarp(&self, b: &BBox) -> Result<BBox> {
        expect_space(b, Space::Warped)?;
        BBox::new(
            self.x.backward(b.x1),
            self.y.backward(b.y1),
            self.x.backward(b.x2),
            self.y.backward(b.y2),
            Space::Original,
        )
    }

    pub fn forward(&self, b: &BBox) -> Result<BBox> {
        expect_space(b, Space::Original)?;
        BBox::new(
            self.x.forward(b.x1)?,
            self.y.forward(b.y1)?,
            self.x.forward(b.x2)?,
            self.y.forward(b.y2)?,
            Space::Warped,
        )
    }
}

fn expect_space(b: &BBox, expected: Space) -> Result<()> {
    if b.space != expected {
        return Err(FoveaError::SpaceMismatch {
            expected,
            found: b.space,
        });
    }
    Ok(())
}

/// Maps a warped-space box back to original space through `T^-1`.
pub fn unwarp_box(b: &BBox, warp: &SeparableWarp) -> Result<BBox> {
    BoxMapper::new(warp)?.unwarp(b)
}

/// Maps an original-space box into warped space by inverting `T^-1`.
pub fn warp_box_forward(b: &BBox, warp: &SeparableWarp) -> Result<BBox> {
    BoxMapper::new(warp)?.forward(b)
}

fn same_space(a: &BBox, b: &BBox) -> Result<()> {
    if a.space != b.space {
        return Err(FoveaError::SpaceMismatch {
            expected: a.space,
            found: b.space,
        });
    }
    Ok(())
}

fn intersection(a: &BBox, b: &BBox) -> f64 {
    let w = (a.x2.min(b.x2) - a.x1.max(b.x1)).max(0.0);
    let h = (a.y2.min(b.y2) - a.y1.max(b.y1)).max(0.0);
    w * h
}

pub fn iou(a: &BBox, b: &BBox) -> Result<f64> {
    same_space(a, b)?;
    let inter = intersection(a, b);
    Ok(inter / (a.area() + b.area() - inter))
}

/// IoU minus the fraction of the tightest enclosing box outside the union.
pub fn giou(a: &BBox, b: &BBox) -> Result<f64> {
    same_space(a, b)?;
    let inter = intersection(a, b);
    let union = a.area() + b.area() - inter;
    let enclosing = (a.x2.max(b.x2) - a.x1.min(b.x1)) * (a.y2.max(b.y2) - a.y1.min(b.y1));
    // rounding can push the enclosing area a hair below the union
    Ok(inter / union - (enclosing - union).max(0.0) / enclosing)
}
