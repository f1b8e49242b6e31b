use crate::error::{FoveaError, Result};
use crate::saliency::SaliencyProfile1D;

/// Fraction of the saliency-grid height used as the default kernel width.
pub const DEFAULT_SIGMA_FRACTION: f64 = 0.178;
/// Default kernel width in grid cells (0.178 of a 31-row grid).
pub const DEFAULT_SIGMA: f64 = 5.5;

/// Truncated Gaussian distance kernel, measured in grid cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AttractionKernel {
    sigma: f64,
    radius: usize,
}

impl AttractionKernel {
    /// Truncates at `ceil(3 * sigma)` cells.
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(FoveaError::InvalidParameter(format!(
                "kernel sigma must be positive, got {sigma}"
            )));
        }
        Ok(Self {
            sigma,
            radius: ((3.0 * sigma).ceil() as usize).max(1),
        })
    }

    pub fn with_radius(sigma: f64, radius: usize) -> Result<Self> {
        let mut k = Self::new(sigma)?;
        if radius == 0 {
            return Err(FoveaError::InvalidParameter(
                "kernel radius must be at least 1".into(),
            ));
        }
        k.radius = radius;
        Ok(k)
    }

    /// Kernel whose width is a fraction of the grid height.
    pub fn for_rows(rows: usize) -> Result<Self> {
        Self::new(DEFAULT_SIGMA_FRACTION * rows as f64)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    /// Support size `2 * radius + 1`.
    pub fn size(&self) -> usize {
        2 * self.radius + 1
    }

    /// Weight at a distance of `d` cells; zero beyond the radius.
    #[inline]
    pub fn weight(&self, d: f64) -> f64 {
        if d.abs() > self.radius as f64 {
            0.0
        } else {
            (-0.5 * d * d / (self.sigma * self.sigma)).exp()
        }
    }
}

impl Default for AttractionKernel {
    fn default() -> Self {
        Self::new(DEFAULT_SIGMA).expect("default sigma is positive")
    }
}

/// Index into an `n`-long sequence mirrored about its cell edges, repeating
/// the reflection for indices further than `n` outside.
#[inline]
pub(crate) fn reflect_index(k: isize, n: usize) -> usize {
    let period = 2 * n as isize;
    let m = k.rem_euclid(period) as usize;
    if m < n {
        m
    } else {
        2 * n - 1 - m
    }
}

/// Pads `radius` cells on both sides by half-sample symmetric reflection:
/// `[1, 2, 3]` with radius 2 becomes `[2, 1, 1, 2, 3, 3, 2]`.
pub fn reflect_pad_profile(s: &SaliencyProfile1D, radius: usize) -> Result<SaliencyProfile1D> {
    if radius == 0 {
        return Err(FoveaError::InvalidParameter(
            "padding radius must be at least 1".into(),
        ));
    }
    let n = s.len();
    let values = (0..n + 2 * radius)
        .map(|i| s.values()[reflect_index(i as isize - radius as isize, n)])
        .collect();
    SaliencyProfile1D::new(values)
}
