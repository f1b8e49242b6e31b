//! Synthetic scenes with known boxes for measuring how well the temporal
//! prior magnifies objects when the previous detections are displaced.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Mode, PipelineConfig};
use super::frame::{process_frame_with, FrameOutput, SequenceState};
use crate::error::Result;
use crate::exec::{map_collect, Execution};
use crate::geometry::{BBox, DetectionSet, ImageBuffer, Space};
use crate::label_map::BoxMapper;
use crate::saliency::jitter_boxes;

pub const SCENE_W: usize = 1920;
pub const SCENE_H: usize = 1200;
pub const DEFAULT_JITTERS: [f64; 6] = [0.0, 10.0, 25.0, 50.0, 100.0, 200.0];

/// Box sizes (square, in pixels) placed in every generated scene.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneSpec {
    pub box_sizes: Vec<f64>,
    /// Minimum distance between a box and the frame border, in pixels.
    pub margin: f64,
}

impl Default for SceneSpec {
    fn default() -> Self {
        Self {
            box_sizes: vec![40.0, 400.0],
            margin: 40.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Scene {
    pub image: ImageBuffer,
    pub boxes: DetectionSet,
}

fn overlaps(a: &BBox, b: &BBox) -> bool {
    a.x1 < b.x2 && b.x1 < a.x2 && a.y1 < b.y2 && b.y1 < a.y2
}

/// Colored, non-overlapping rectangles on a gray background.
pub fn generate_scene(seed: u64, spec: &SceneSpec) -> Result<Scene> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (fw, fh) = (SCENE_W as f64, SCENE_H as f64);
    let mut boxes: Vec<BBox> = Vec::with_capacity(spec.box_sizes.len());
    let mut colors = Vec::with_capacity(spec.box_sizes.len());
    for &size in &spec.box_sizes {
        let placed = loop {
            let x = rng.gen_range(spec.margin..=fw - spec.margin - size);
            let y = rng.gen_range(spec.margin..=fh - spec.margin - size);
            let b = BBox::from_pixel_xywh([x, y, size, size], SCENE_W, SCENE_H, Space::Original)?;
            if !boxes.iter().any(|o| overlaps(o, &b)) {
                break b;
            }
        };
        boxes.push(placed);
        colors.push([rng.gen::<f32>(), rng.gen::<f32>(), rng.gen::<f32>()]);
    }

    let mut data = vec![0.5f32; SCENE_W * SCENE_H * 3];
    for (b, color) in boxes.iter().zip(&colors) {
        let x0 = (b.x1 * fw).round() as usize;
        let x1 = (b.x2 * fw).round() as usize;
        let y0 = (b.y1 * fh).round() as usize;
        let y1 = (b.y2 * fh).round() as usize;
        for y in y0..y1 {
            for x in x0..x1 {
                data[(y * SCENE_W + x) * 3..(y * SCENE_W + x) * 3 + 3].copy_from_slice(color);
            }
        }
    }
    Ok(Scene {
        image: ImageBuffer::new(SCENE_W, SCENE_H, 3, data)?,
        boxes: DetectionSet::from_boxes(boxes)?,
    })
}

/// One CSV row: a true box under one jitter level.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthRow {
    pub seed: u64,
    pub jitter: f64,
    pub box_index: usize,
    pub box_size: f64,
    /// Warped area over source area of the true box (source-measure mean).
    pub mean_magnification: f64,
    /// Mean of the magnification map over output pixels inside the warped box.
    pub pixel_mean_magnification: f64,
    /// `scale^2`, the magnification of a plain resize.
    pub baseline: f64,
    /// Largest edge error of unwarp(forward(box)), in output pixels.
    pub roundtrip_px: f64,
}

pub const SYNTH_CSV_HEADER: &str =
    "seed,jitter,box_index,box_size,mean_magnification,pixel_mean_magnification,baseline,roundtrip_px";

impl SynthRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{:.9},{:.9},{:.9},{:.6e}",
            self.seed,
            self.jitter,
            self.box_index,
            self.box_size,
            self.mean_magnification,
            self.pixel_mean_magnification,
            self.baseline,
            self.roundtrip_px
        )
    }
}

pub fn synth_csv(rows: &[SynthRow]) -> String {
    let mut out = String::from(SYNTH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        writeln!(out, "{}", r.csv_line()).expect("writing to a String");
    }
    out
}

fn box_rows(
    scene: &Scene,
    frame: &FrameOutput,
    seed: u64,
    jitter: f64,
    spec: &SceneSpec,
    scale: f64,
) -> Result<Vec<SynthRow>> {
    let mapper = BoxMapper::new(&frame.warp)?;
    let d = frame.warp.dims();
    let (ow, oh) = (d.out_w as f64, d.out_h as f64);
    let (sw, sh) = (d.src_w as f64, d.src_h as f64);
    let mag = &frame.magnification;

    scene
        .boxes
        .boxes()
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let fwd = mapper.forward(b)?;
            let back = mapper.unwarp(&fwd)?;
            let mean = (fwd.area() * ow * oh) / (b.area() * sw * sh);

            let cols = (0..d.out_w).filter(|&i| {
                let c = (i as f64 + 0.5) / ow;
                c >= fwd.x1 && c <= fwd.x2
            });
            let rows: Vec<usize> = (0..d.out_h)
                .filter(|&j| {
                    let c = (j as f64 + 0.5) / oh;
                    c >= fwd.y1 && c <= fwd.y2
                })
                .collect();
            let (mut sum, mut n) = (0.0, 0usize);
            for i in cols {
                for &j in &rows {
                    sum += mag.get(i, j);
                    n += 1;
                }
            }
            let roundtrip = [
                (back.x1 - b.x1) * ow,
                (back.x2 - b.x2) * ow,
                (back.y1 - b.y1) * oh,
                (back.y2 - b.y2) * oh,
            ]
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()));

            Ok(SynthRow {
                seed,
                jitter,
                box_index: k,
                box_size: spec.box_sizes[k],
                mean_magnification: mean,
                pixel_mean_magnification: if n > 0 { sum / n as f64 } else { f64::NAN },
                baseline: scale * scale,
                roundtrip_px: roundtrip,
            })
        })
        .collect()
}

/// Runs one scene under one jitter level: the jittered true boxes act as the
/// previous frame's detections for an `si` warp.
pub fn run_scenario(
    scene: &Scene,
    seed: u64,
    jitter: f64,
    config: &PipelineConfig,
    spec: &SceneSpec,
    exec: Execution,
) -> Result<(FrameOutput, Vec<SynthRow>)> {
    let cfg = PipelineConfig {
        mode: Mode::Si,
        ..config.clone()
    };
    // one jitter stream per scene, shared by every jitter level
    let previous = jitter_boxes(
        &scene.boxes,
        jitter,
        seed ^ 0x9e37_79b9_7f4a_7c15,
        SCENE_W,
        SCENE_H,
    )?;
    let state = SequenceState {
        previous: Some(previous),
        frame_index: 1,
    };
    let frame = process_frame_with(&scene.image, &state, &cfg, None, exec)?;
    let rows = box_rows(scene, &frame, seed, jitter, spec, cfg.scale)?;
    Ok((frame, rows))
}

/// Sweeps `jitters` over scenes `first_seed .. first_seed + seeds`.
/// Rows are ordered by seed, then jitter, then box.
pub fn synth_eval(
    first_seed: u64,
    seeds: usize,
    jitters: &[f64],
    config: &PipelineConfig,
    spec: &SceneSpec,
    exec: Execution,
) -> Result<Vec<SynthRow>> {
    let seed_list: Vec<u64> = (0..seeds as u64).map(|k| first_seed + k).collect();
    let per_seed = map_collect(&seed_list, exec, |&seed| -> Result<Vec<SynthRow>> {
        let scene = generate_scene(seed, spec)?;
        let mut rows = Vec::new();
        for &j in jitters {
            let (_, r) = run_scenario(&scene, seed, j, config, spec, Execution::Sequential)?;
            rows.extend(r);
        }
        Ok(rows)
    });
    let mut out = Vec::new();
    for r in per_seed {
        out.extend(r?);
    }
    Ok(out)
}

/// Mean magnification per `(box_size, jitter)`, in first-seen order.
pub fn summarize(rows: &[SynthRow]) -> Vec<(f64, f64, f64)> {
    let mut keys: Vec<(f64, f64)> = Vec::new();
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for r in rows {
        let key = (r.box_size, r.jitter);
        let k = match keys.iter().position(|&x| x == key) {
            Some(k) => k,
            None => {
                keys.push(key);
                sums.push((0.0, 0));
                keys.len() - 1
            }
        };
        sums[k].0 += r.mean_magnification;
        sums[k].1 += 1;
    }
    keys.into_iter()
        .zip(sums)
        .map(|((size, j), (s, n))| (size, j, s / n as f64))
        .collect()
}
