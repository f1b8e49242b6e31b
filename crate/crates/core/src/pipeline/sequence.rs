use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::PipelineConfig;
use super::detections::ingest_detections;
use super::frame::{process_frame_with, update_state, SequenceState};
use super::io::{load_image, save_image};
use crate::error::Result;
use crate::exec::Execution;
use crate::geometry::DetectionSet;
use crate::saliency::{dataset_prior, GridSpec, SaliencyGrid2D};

const IMAGE_EXTENSIONS: &[&str] = &["png", "ppm", "pgm"];

#[derive(Clone, Debug)]
pub struct SequenceOptions {
    pub frames: PathBuf,
    pub detections: PathBuf,
    pub out: PathBuf,
}

/// Image files of a directory in name order.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut frames: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension()
                .and_then(|e| e.to_str())
                .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()))
        })
        .collect();
    frames.sort();
    Ok(frames)
}

/// Warps every frame in order. Frame `t` is warped from the detections of
/// frame `t - 1` (`<basename>.json` in the detections directory; a missing
/// file counts as no detections). Writes `<basename>.png` per frame and a
/// `summary.csv`.
pub fn run_sequence(
    opts: &SequenceOptions,
    config: &PipelineConfig,
    prior: Option<&SaliencyGrid2D>,
    exec: Execution,
) -> Result<String> {
    std::fs::create_dir_all(&opts.out)?;
    let mut state = SequenceState::new();
    let mut summary = String::from("frame,index,mode,mag_mean,mag_min,mag_max\n");

    for path in list_frames(&opts.frames)? {
        let stem = path
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("frame")
            .to_string();
        let img = load_image(&path)?;
        let out = process_frame_with(&img, &state, config, prior, exec)?;
        save_image(&out.warped, &opts.out.join(format!("{stem}.png")))?;
        let m = &out.magnification;
        writeln!(
            summary,
            "{stem},{},{},{:.9},{:.9},{:.9}",
            state.frame_index,
            config.mode,
            m.mean(),
            m.min(),
            m.max()
        )
        .expect("writing to a String");

        let det_path = opts.detections.join(format!("{stem}.json"));
        let dets = if det_path.exists() {
            ingest_detections(&det_path, img.width(), img.height())?
        } else {
            DetectionSet::empty()
        };
        state = update_state(&state, dets)?;
    }
    std::fs::write(opts.out.join("summary.csv"), &summary)?;
    Ok(summary)
}

/// Normalized dataset prior from an annotation file of all training boxes.
pub fn build_prior(
    annotations: &Path,
    image_w: usize,
    image_h: usize,
    config: &PipelineConfig,
) -> Result<SaliencyGrid2D> {
    let boxes = ingest_detections(annotations, image_w, image_h)?;
    let grid = GridSpec::new(config.rows, config.cols, image_w, image_h);
    dataset_prior(&boxes, &config.kde_params(), grid)?.normalized()
}
