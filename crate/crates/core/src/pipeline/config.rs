use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{FoveaError, Result};
use crate::saliency::{KdeParams, DEFAULT_COLS, DEFAULT_ROWS};
use crate::warp::{AttractionKernel, DEFAULT_SIGMA};

/// Which saliency drives the warp.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Dataset-wide prior.
    Sd,
    /// Previous-frame detections.
    Si,
    /// Blend of `Si` and `Sd`.
    Sc,
    /// No magnification.
    Uniform,
}

impl FromStr for Mode {
    type Err = FoveaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sd" => Ok(Mode::Sd),
            "si" => Ok(Mode::Si),
            "sc" => Ok(Mode::Sc),
            "uniform" => Ok(Mode::Uniform),
            other => Err(FoveaError::Config(format!(
                "unknown mode `{other}` (expected sd, si, sc or uniform)"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sd => "sd",
            Mode::Si => "si",
            Mode::Sc => "sc",
            Mode::Uniform => "uniform",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub mode: Mode,
    /// Output size over input size, in `(0, 1]`.
    pub scale: f64,
    pub amplitude: f64,
    pub bandwidth: f64,
    pub alpha: f64,
    pub rows: usize,
    pub cols: usize,
    /// Attraction-kernel width in grid cells.
    pub sigma: f64,
    pub anti_crop: bool,
    pub score_weighted: bool,
    pub seed: u64,
    /// Jitter in pixels applied to previous detections by the synthetic harness.
    pub jitter: f64,
    /// Serialized dataset prior, required by `sd` and `sc`.
    pub prior: Option<PathBuf>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let kde = KdeParams::default();
        Self {
            mode: Mode::Si,
            scale: 0.5,
            amplitude: kde.amplitude,
            bandwidth: kde.bandwidth,
            alpha: kde.alpha,
            rows: DEFAULT_ROWS,
            cols: DEFAULT_COLS,
            sigma: DEFAULT_SIGMA,
            anti_crop: true,
            score_weighted: false,
            seed: 0,
            jitter: 0.0,
            prior: None,
        }
    }
}

pub const CONFIG_KEYS: &[&str] = &[
    "mode",
    "scale",
    "amplitude",
    "bandwidth",
    "alpha",
    "rows",
    "cols",
    "sigma",
    "anti_crop",
    "score_weighted",
    "seed",
    "jitter",
    "prior",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| FoveaError::Config(format!("invalid value `{value}` for `{key}`")))
}

fn parse_flag(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "on" | "yes" => Ok(true),
        "0" | "false" | "off" | "no" => Ok(false),
        _ => Err(FoveaError::Config(format!(
            "invalid flag `{value}` for `{key}`"
        ))),
    }
}

impl PipelineConfig {
    /// Parses flat `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                FoveaError::Config(format!("line {}: expected `key = value`", n + 1))
            })?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| FoveaError::Config(format!("line {}: {e}", n + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text).map_err(|e| FoveaError::Config(format!("{}: {e}", path.display())))
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "mode" => self.mode = value.parse()?,
            "scale" => self.scale = parse(key, value)?,
            "amplitude" => self.amplitude = parse(key, value)?,
            "bandwidth" => self.bandwidth = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "rows" => self.rows = parse(key, value)?,
            "cols" => self.cols = parse(key, value)?,
            "sigma" => self.sigma = parse(key, value)?,
            "anti_crop" => self.anti_crop = parse_flag(key, value)?,
            "score_weighted" => self.score_weighted = parse_flag(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "jitter" => self.jitter = parse(key, value)?,
            "prior" => self.prior = Some(PathBuf::from(value.trim())),
            other => {
                return Err(FoveaError::Config(format!("unknown key `{other}`")));
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale > 0.0 && self.scale <= 1.0) {
            return Err(FoveaError::Config(format!(
                "scale must lie in (0, 1], got {}",
                self.scale
            )));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(FoveaError::Config(
                "grid rows and cols must be positive".into(),
            ));
        }
        if !(self.jitter >= 0.0) {
            return Err(FoveaError::Config(format!(
                "jitter must be nonnegative, got {}",
                self.jitter
            )));
        }
        self.kernel()?;
        self.kde_params().validate()
    }

    pub fn kernel(&self) -> Result<AttractionKernel> {
        AttractionKernel::new(self.sigma)
    }

    /// KDE parameters; the floor uses the kernel's support size.
    pub fn kde_params(&self) -> KdeParams {
        let kernel_size = self.kernel().map(|k| k.size()).unwrap_or(1);
        KdeParams {
            amplitude: self.amplitude,
            bandwidth: self.bandwidth,
            alpha: self.alpha,
            kernel_size,
            score_weighted: self.score_weighted,
        }
    }
}
