//! Image, prior, warp, and magnification file formats.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use image::{DynamicImage, ImageFormat};

use crate::error::{Axis, FoveaError, Result};
use crate::geometry::ImageBuffer;
use crate::saliency::SaliencyGrid2D;
use crate::warp::{MagnificationMap, SeparableWarp};

const PRIOR_MAGIC: &str = "FOVEA-SD v1";

fn codec(path: &Path) -> impl FnOnce(image::ImageError) -> FoveaError + '_ {
    move |source| FoveaError::Codec {
        path: path.to_path_buf(),
        source,
    }
}

/// Reads PNG, PPM, or PGM at 8 bits per channel.
pub fn load_image(path: &Path) -> Result<ImageBuffer> {
    let img = image::open(path).map_err(codec(path))?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    match img.color().channel_count() {
        1 => ImageBuffer::from_u8(w, h, 1, img.to_luma8().as_raw()),
        2 => ImageBuffer::from_u8(w, h, 2, img.to_luma_alpha8().as_raw()),
        3 => ImageBuffer::from_u8(w, h, 3, img.to_rgb8().as_raw()),
        _ => ImageBuffer::from_u8(w, h, 4, img.to_rgba8().as_raw()),
    }
}

fn to_dynamic(img: &ImageBuffer) -> Result<DynamicImage> {
    let (w, h) = (img.width() as u32, img.height() as u32);
    let bytes = img.to_u8();
    let bad = || FoveaError::InvalidImage("buffer size does not match dimensions".into());
    Ok(match img.channels() {
        1 => DynamicImage::ImageLuma8(image::GrayImage::from_raw(w, h, bytes).ok_or_else(bad)?),
        2 => {
            DynamicImage::ImageLumaA8(image::GrayAlphaImage::from_raw(w, h, bytes).ok_or_else(bad)?)
        }
        3 => DynamicImage::ImageRgb8(image::RgbImage::from_raw(w, h, bytes).ok_or_else(bad)?),
        _ => DynamicImage::ImageRgba8(image::RgbaImage::from_raw(w, h, bytes).ok_or_else(bad)?),
    })
}

/// Writes by extension: `.png`, `.ppm` (RGB), or `.pgm` (grayscale).
pub fn save_image(img: &ImageBuffer, path: &Path) -> Result<()> {
    let ext = path
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase)
        .unwrap_or_default();
    let dynamic = to_dynamic(img)?;
    let result = match ext.as_str() {
        "png" => dynamic.save_with_format(path, ImageFormat::Png),
        "ppm" => {
            DynamicImage::ImageRgb8(dynamic.to_rgb8()).save_with_format(path, ImageFormat::Pnm)
        }
        "pgm" => {
            DynamicImage::ImageLuma8(dynamic.to_luma8()).save_with_format(path, ImageFormat::Pnm)
        }
        other => {
            return Err(FoveaError::InvalidImage(format!(
                "unsupported output extension `{other}` for {}",
                path.display()
            )))
        }
    };
    result.map_err(codec(path))
}

/// Header line `FOVEA-SD v1 <rows> <cols>` then little-endian f64 values.
pub fn write_prior(grid: &SaliencyGrid2D, path: &Path) -> Result<()> {
    let mut bytes = format!("{PRIOR_MAGIC} {} {}\n", grid.rows(), grid.cols()).into_bytes();
    for v in grid.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Reads a prior and checks it sums to one.
pub fn read_prior(path: &Path) -> Result<SaliencyGrid2D> {
    let bytes = std::fs::read(path)?;
    let bad = |message: String| FoveaError::InvalidPrior {
        path: path.to_path_buf(),
        message,
    };
    let nl = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| bad("missing header line".into()))?;
    let header =
        std::str::from_utf8(&bytes[..nl]).map_err(|_| bad("header is not UTF-8".into()))?;
    let dims = header
        .strip_prefix(PRIOR_MAGIC)
        .ok_or_else(|| bad(format!("expected `{PRIOR_MAGIC}` header, found `{header}`")))?;
    let parts: Vec<usize> = dims
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| bad(format!("bad dimension `{t}`"))))
        .collect::<Result<_>>()?;
    let [rows, cols] = parts[..] else {
        return Err(bad("header must carry rows and cols".into()));
    };
    let body = &bytes[nl + 1..];
    if body.len() != rows * cols * 8 {
        return Err(bad(format!(
            "expected {} bytes of values, found {}",
            rows * cols * 8,
            body.len()
        )));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let grid = SaliencyGrid2D::new(rows, cols, values).map_err(|e| bad(e.to_string()))?;
    if (grid.sum() - 1.0).abs() > 1e-6 {
        return Err(bad(format!("values sum to {}, expected 1", grid.sum())));
    }
    Ok(grid)
}

/// `axis,index,value` rows for both axis maps.
pub fn warp_csv(warp: &SeparableWarp) -> String {
    let mut out = String::from("axis,index,value\n");
    for axis in [Axis::X, Axis::Y] {
        for (i, v) in warp.samples(axis).iter().enumerate() {
            writeln!(out, "{axis},{i},{v:.17e}").expect("writing to a String");
        }
    }
    out
}

pub fn write_warp_csv(warp: &SeparableWarp, path: &Path) -> Result<()> {
    std::fs::write(path, warp_csv(warp))?;
    Ok(())
}

/// 16-bit binary PGM with `round(mag * 4096)` samples.
pub fn write_magnification_pgm(map: &MagnificationMap, path: &Path) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    write!(file, "P5\n{} {}\n65535\n", map.width(), map.height())?;
    for v in map.to_fixed_u16() {
        file.write_all(&v.to_be_bytes())?;
    }
    file.flush()?;
    Ok(())
}

pub fn write_magnification_csv(map: &MagnificationMap, path: &Path) -> Result<()> {
    let mut out = String::from("row,col,value\n");
    for j in 0..map.height() {
        for i in 0..map.width() {
            writeln!(out, "{j},{i},{:.9e}", map.get(i, j)).expect("writing to a String");
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Picks the PGM or CSV writer by extension.
pub fn write_magnification(map: &MagnificationMap, path: &Path) -> Result<()> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(e) if e.eq_ignore_ascii_case("csv") => write_magnification_csv(map, path),
        _ => write_magnification_pgm(map, path),
    }
}
