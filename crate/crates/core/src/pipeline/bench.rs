//! Wall-clock timing of the pipeline stages at 1920x1200 -> 960x600.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Mode, PipelineConfig};
use super::frame::{process_frame_with, SequenceState};
use crate::error::{FoveaError, Result};
use crate::exec::Execution;
use crate::geometry::{BBox, DetectionSet, ImageBuffer, Space};
use crate::label_map::BoxMapper;
use crate::saliency::{kde_saliency, normalize_and_marginalize, GridSpec};
use crate::warp::{build_separable_backward_map, warp_image_with, SeparableWarp, WarpDims};

const WARMUP: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct TimingRow {
    pub component: String,
    pub samples: usize,
    pub median_ms: f64,
    pub p95_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchReport {
    pub rows: Vec<TimingRow>,
    /// Median of the saliency-driven warp over the identity warp.
    pub si_over_identity: f64,
}

impl BenchReport {
    pub fn get(&self, component: &str) -> Option<&TimingRow> {
        self.rows.iter().find(|r| r.component == component)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("component,samples,median_ms,p95_ms\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{:.4},{:.4}",
                r.component, r.samples, r.median_ms, r.p95_ms
            )
            .expect("writing to a String");
        }
        writeln!(
            out,
            "ratio_si_over_identity,1,{:.4},{:.4}",
            self.si_over_identity, self.si_over_identity
        )
        .expect("writing to a String");
        out
    }
}

/// Nearest-rank percentile of sorted samples.
fn percentile(sorted: &[f64], q: f64) -> f64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Summarizes raw millisecond samples.
pub fn timing_row(component: &str, mut samples: Vec<f64>) -> TimingRow {
    samples.sort_by(f64::total_cmp);
    TimingRow {
        component: component.to_string(),
        samples: samples.len(),
        median_ms: median(&samples),
        p95_ms: percentile(&samples, 0.95),
    }
}

fn time<T>(iterations: usize, mut f: impl FnMut() -> Result<T>) -> Result<Vec<f64>> {
    for _ in 0..WARMUP {
        f()?;
    }
    (0..iterations)
        .map(|_| {
            let t = Instant::now();
            f()?;
            Ok(t.elapsed().as_secs_f64() * 1e3)
        })
        .collect()
}

fn bench_scene(seed: u64) -> Result<(ImageBuffer, DetectionSet)> {
    let (w, h) = (1920usize, 1200usize);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = (0..w * h * 3).map(|_| rng.gen::<f32>()).collect();
    let img = ImageBuffer::new(w, h, 3, data)?;
    let boxes = (0..100)
        .map(|_| {
            let bw = rng.gen_range(20.0..300.0);
            let bh = rng.gen_range(20.0..300.0);
            let x = rng.gen_range(0.0..(w as f64 - bw));
            let y = rng.gen_range(0.0..(h as f64 - bh));
            BBox::from_pixel_xywh([x, y, bw, bh], w, h, Space::Original)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((img, DetectionSet::from_boxes(boxes)?))
}

/// Times saliency, warp-map construction, image warping (identity and
/// saliency-driven), unwarping 100 boxes, and a full `si` frame.
pub fn bench(config: &PipelineConfig, iterations: usize, exec: Execution) -> Result<BenchReport> {
    if iterations == 0 {
        return Err(FoveaError::InvalidParameter(
            "bench needs at least one iteration".into(),
        ));
    }
    config.validate()?;
    let (img, boxes) = bench_scene(config.seed)?;
    let (w, h) = (img.width(), img.height());
    let grid = GridSpec::new(config.rows, config.cols, w, h);
    let params = config.kde_params();
    let kernel = config.kernel()?;
    let dims = WarpDims::scaled(w, h, config.scale);

    let saliency = time(iterations, || kde_saliency(&boxes, &params, grid))?;

    let s = kde_saliency(&boxes, &params, grid)?;
    let (s_x, s_y) = normalize_and_marginalize(&s)?;
    let warp_map = time(iterations, || {
        build_separable_backward_map(&s_x, &s_y, &kernel, dims, config.anti_crop)
    })?;

    let warp = build_separable_backward_map(&s_x, &s_y, &kernel, dims, config.anti_crop)?;
    let identity = SeparableWarp::identity(dims)?;
    let warp_identity = time(iterations, || warp_image_with(&img, &identity, exec))?;
    let warp_si = time(iterations, || warp_image_with(&img, &warp, exec))?;

    let warped_boxes: Vec<BBox> = {
        let mapper = BoxMapper::new(&warp)?;
        boxes
            .boxes()
            .iter()
            .map(|b| mapper.forward(b))
            .collect::<Result<_>>()?
    };
    let unwarp = time(iterations, || {
        let mapper = BoxMapper::new(&warp)?;
        warped_boxes
            .iter()
            .map(|b| mapper.unwarp(b))
            .collect::<Result<Vec<_>>>()
    })?;

    let si_cfg = PipelineConfig {
        mode: Mode::Si,
        ..config.clone()
    };
    let state = SequenceState {
        previous: Some(boxes.clone()),
        frame_index: 1,
    };
    let frame = time(iterations, || {
        process_frame_with(&img, &state, &si_cfg, None, exec)
    })?;

    let rows = vec![
        timing_row("saliency", saliency),
        timing_row("warp_map", warp_map),
        timing_row("warp_image_identity", warp_identity),
        timing_row("warp_image_si", warp_si),
        timing_row("unwarp_100_boxes", unwarp),
        timing_row("si_frame", frame),
    ];
    let si_over_identity = rows[3].median_ms / rows[2].median_ms;
    Ok(BenchReport {
        rows,
        si_over_identity,
    })
}
