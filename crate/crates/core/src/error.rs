use std::path::PathBuf;

use thiserror::Error;

use crate::geometry::Space;

/// Axis of a sampled backward map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl std::fmt::Display for Axis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Axis::X => f.write_str("x"),
            Axis::Y => f.write_str("y"),
        }
    }
}

#[derive(Debug, Error)]
pub enum FoveaError {
    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("invalid box ({x1}, {y1}, {x2}, {y2}): requires x1 < x2, y1 < y2, all finite")]
    InvalidBox { x1: f64, y1: f64, x2: f64, y2: f64 },

    #[error("box space mismatch: expected {expected:?}, found {found:?}")]
    SpaceMismatch { expected: Space, found: Space },

    #[error("detection set is inconsistent: {0}")]
    InvalidDetections(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate saliency: {0}")]
    DegenerateSaliency(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-monotone backward map on axis {axis} at index {index} (delta {delta:e})")]
    Foldover {
        axis: Axis,
        index: usize,
        delta: f64,
    },

    #[error("coordinate {value} outside the backward map range [{lo}, {hi}] on axis {axis}")]
    OutOfRange {
        axis: Axis,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{path}: malformed detection JSON: {message}")]
    MalformedJson { path: PathBuf, message: String },

    #[error("{path}: record {index}: missing required key `{key}`")]
    MissingKey {
        path: PathBuf,
        index: usize,
        key: &'static str,
    },

    #[error("{path}: record {index}: {message}")]
    InvalidRecord {
        path: PathBuf,
        index: usize,
        message: String,
    },

    #[error("{path}: nonpositive box size at record {index} (w={w}, h={h})")]
    NonPositiveSize {
        path: PathBuf,
        index: usize,
        w: f64,
        h: f64,
    },

    #[error("prior file {path}: {message}")]
    InvalidPrior { path: PathBuf, message: String },

    #[error("config: {0}")]
    Config(String),

    #[error("image codec error for {path}: {source}")]
    Codec {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, FoveaError>;
