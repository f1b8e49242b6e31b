//! Grid-level backward maps along one axis and the piecewise-linear
//! functions used to carry them to pixel resolution.

use super::kernel::{reflect_index, AttractionKernel};
use crate::error::{Axis, FoveaError, Result};

/// One nonzero term of the attraction sum: source cell, its coordinate, and
/// its kernel weight.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Term {
    pub cell: usize,
    pub coord: f64,
    pub weight: f64,
}

/// Banded attraction operator for an `n`-cell axis.
///
/// Knots sit at the left edge, every cell center, and the right edge
/// (`n + 2` in total). With anti-crop the sum runs over the reflect-padded
/// axis, whose padded cells keep extending the coordinate ramp beyond
/// `[0, 1]`; without it, cells outside the axis are absent.
#[derive(Clone, Debug)]
pub(crate) struct AxisOperator {
    n: usize,
    knots: Vec<f64>,
    terms: Vec<Vec<Term>>,
}

impl AxisOperator {
    pub fn new(n: usize, kernel: &AttractionKernel, anti_crop: bool) -> Self {
        let r = kernel.radius() as isize;
        let ni = n as isize;
        let coord = |c: isize| (c as f64 + 0.5) / n as f64;
        let in_range = |c: isize| anti_crop || (0..ni).contains(&c);

        // integer-offset taps for cell centers, half-integer taps for edges
        let center_taps: Vec<f64> = (-r..=r).map(|t| kernel.weight(t as f64)).collect();
        let edge_taps: Vec<f64> = (0..r).map(|m| kernel.weight(m as f64 + 0.5)).collect();

        let mut terms = Vec::with_capacity(n + 2);
        let push = |list: &mut Vec<Term>, c: isize, weight: f64| {
            if weight > 0.0 && in_range(c) {
                list.push(Term {
                    cell: reflect_index(c, n),
                    coord: coord(c),
                    weight,
                });
            }
        };

        let mut left = Vec::new();
        for m in 0..r {
            push(&mut left, -1 - m, edge_taps[m as usize]);
            push(&mut left, m, edge_taps[m as usize]);
        }
        terms.push(left);

        for c in 0..ni {
            let mut list = Vec::with_capacity(center_taps.len());
            for t in -r..=r {
                push(&mut list, c + t, center_taps[(t + r) as usize]);
            }
            terms.push(list);
        }

        let mut right = Vec::new();
        for m in 0..r {
            push(&mut right, ni - 1 - m, edge_taps[m as usize]);
            push(&mut right, ni + m, edge_taps[m as usize]);
        }
        terms.push(right);

        let knots = std::iter::once(0.0)
            .chain((0..ni).map(coord))
            .chain(std::iter::once(1.0))
            .collect();
        Self { n, knots, terms }
    }

    /// Knot positions `[0, centers..., 1]`.
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn terms(&self, knot: usize) -> &[Term] {
        &self.terms[knot]
    }

    /// Backward-map values at every knot for saliency `s`.
    pub fn apply(&self, s: &[f64], axis: Axis) -> Result<Vec<f64>> {
        debug_assert_eq!(s.len(), self.n);
        self.terms
            .iter()
            .enumerate()
            .map(|(k, list)| {
                let (mut num, mut den) = (0.0, 0.0);
                for t in list {
                    let w = t.weight * s[t.cell];
                    num += w * t.coord;
                    den += w;
                }
                if den > 0.0 {
                    Ok(num / den)
                } else {
                    Err(FoveaError::DegenerateSaliency(format!(
                        "no saliency within kernel reach of {axis} knot {k}"
                    )))
                }
            })
            .collect()
    }
}

/// Continuous piecewise-linear function through sorted knots, held constant
/// beyond the first and last knot.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseLinear {
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl PiecewiseLinear {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.len() < 2 {
            return Err(FoveaError::InvalidParameter(format!(
                "piecewise-linear map needs matching knot lists of length >= 2 ({} vs {})",
                xs.len(),
                ys.len()
            )));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || ys.iter().any(|y| !y.is_finite()) {
            return Err(FoveaError::InvalidParameter(
                "knot positions must be strictly increasing and values finite".into(),
            ));
        }
        Ok(Self { xs, ys })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    /// Segment index `k` and fraction along `[xs[k], xs[k + 1]]`.
    #[inline]
    pub(crate) fn locate(&self, x: f64) -> (usize, f64) {
        let last = self.xs.len() - 1;
        if x <= self.xs[0] {
            return (0, 0.0);
        }
        if x >= self.xs[last] {
            return (last - 1, 1.0);
        }
        let k = self.xs.partition_point(|&v| v <= x) - 1;
        (k, (x - self.xs[k]) / (self.xs[k + 1] - self.xs[k]))
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (k, t) = self.locate(x);
        self.ys[k] + t * (self.ys[k + 1] - self.ys[k])
    }

    /// Solves `eval(x) = y` on a strictly increasing function by binary
    /// search over the knot values and exact inversion within the segment.
    pub fn invert(&self, y: f64) -> Option<f64> {
        let last = self.ys.len() - 1;
        if !(y >= self.ys[0] && y <= self.ys[last]) {
            return None;
        }
        let k = self.ys.partition_point(|&v| v <= y).clamp(1, last) - 1;
        let dy = self.ys[k + 1] - self.ys[k];
        let t = if dy > 0.0 { (y - self.ys[k]) / dy } else { 0.0 };
        Some(self.xs[k] + t * (self.xs[k + 1] - self.xs[k]))
    }
}
