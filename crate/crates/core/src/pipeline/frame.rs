use super::config::{Mode, PipelineConfig};
use crate::error::{FoveaError, Result};
use crate::exec::Execution;
use crate::geometry::{DetectionSet, ImageBuffer, Space};
use crate::saliency::{
    combine_saliency, normalize_and_marginalize, temporal_prior, GridSpec, SaliencyGrid2D,
};
use crate::warp::{
    build_separable_backward_map, check_foldover, compute_magnification_map, warp_image_with,
    MagnificationMap, SeparableWarp, WarpDims,
};

/// Temporal state of one video sequence.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SequenceState {
    pub previous: Option<DetectionSet>,
    pub frame_index: usize,
}

impl SequenceState {
    pub fn new() -> Self {
        Self::default()
    }
}

/// Records this frame's (original-space) detections for the next frame.
pub fn update_state(state: &SequenceState, detections: DetectionSet) -> Result<SequenceState> {
    if let Some(space @ Space::Warped) = detections.space() {
        return Err(FoveaError::SpaceMismatch {
            expected: Space::Original,
            found: space,
        });
    }
    Ok(SequenceState {
        previous: Some(detections),
        frame_index: state.frame_index + 1,
    })
}

#[derive(Clone, Debug)]
pub struct FrameOutput {
    pub warped: ImageBuffer,
    pub warp: SeparableWarp,
    /// Normalized saliency that produced the warp.
    pub saliency: SaliencyGrid2D,
    pub magnification: MagnificationMap,
}

/// Normalized saliency for the configured mode, or `None` when the warp is
/// the identity (uniform mode, or `si` with nothing detected yet).
pub fn frame_saliency(
    state: &SequenceState,
    config: &PipelineConfig,
    prior: Option<&SaliencyGrid2D>,
    image_w: usize,
    image_h: usize,
) -> Result<Option<SaliencyGrid2D>> {
    let grid = GridSpec::new(config.rows, config.cols, image_w, image_h);
    let params = config.kde_params();
    let need_prior = || -> Result<SaliencyGrid2D> {
        let p = prior.ok_or_else(|| {
            FoveaError::Config(format!("mode {} requires a dataset prior", config.mode))
        })?;
        if (p.rows(), p.cols()) != (config.rows, config.cols) {
            return Err(FoveaError::DimensionMismatch(format!(
                "prior is {}x{}, config grid is {}x{}",
                p.rows(),
                p.cols(),
                config.rows,
                config.cols
            )));
        }
        p.normalized()
    };
    let has_previous = state.previous.as_ref().is_some_and(|d| !d.is_empty());

    match config.mode {
        Mode::Uniform => Ok(None),
        Mode::Si if !has_previous => Ok(None),
        Mode::Si => Ok(Some(
            temporal_prior(state.previous.as_ref(), &params, grid)?.normalized()?,
        )),
        Mode::Sd => Ok(Some(need_prior()?)),
        Mode::Sc => {
            let s_d = need_prior()?;
            let s_i = temporal_prior(state.previous.as_ref(), &params, grid)?.normalized()?;
            Ok(Some(combine_saliency(&s_i, &s_d, config.alpha)?))
        }
    }
}

/// Saliency, separable backward map with anti-crop, and warped image for one
/// frame. The state is read, never advanced.
pub fn process_frame(
    img: &ImageBuffer,
    state: &SequenceState,
    config: &PipelineConfig,
    prior: Option<&SaliencyGrid2D>,
) -> Result<FrameOutput> {
    process_frame_with(img, state, config, prior, Execution::default())
}

pub fn process_frame_with(
    img: &ImageBuffer,
    state: &SequenceState,
    config: &PipelineConfig,
    prior: Option<&SaliencyGrid2D>,
    exec: Execution,
) -> Result<FrameOutput> {
    config.validate()?;
    let (w, h) = (img.width(), img.height());
    let dims = WarpDims::scaled(w, h, config.scale);
    let (warp, saliency) = match frame_saliency(state, config, prior, w, h)? {
        None => (
            SeparableWarp::identity(dims)?,
            SaliencyGrid2D::uniform(config.rows, config.cols)?,
        ),
        Some(s) => {
            let (s_x, s_y) = normalize_and_marginalize(&s)?;
            let warp = build_separable_backward_map(
                &s_x,
                &s_y,
                &config.kernel()?,
                dims,
                config.anti_crop,
            )?;
            (warp, s)
        }
    };
    check_foldover(&warp).into_result()?;
    let warped = warp_image_with(img, &warp, exec)?;
    let magnification = compute_magnification_map(&warp)?;
    Ok(FrameOutput {
        warped,
        warp,
        saliency,
        magnification,
    })
}
