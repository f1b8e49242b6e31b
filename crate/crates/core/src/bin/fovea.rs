use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fovea::geometry::DetectionSet;
use fovea::pipeline::config::{Mode, PipelineConfig};
use fovea::pipeline::io::{
    load_image, read_prior, save_image, write_magnification, write_prior, write_warp_csv,
};
use fovea::pipeline::synth::{SceneSpec, DEFAULT_JITTERS};
use fovea::pipeline::{
    bench, build_prior, ingest_detections, process_frame_with, run_sequence, summarize, synth_csv,
    synth_eval, SequenceOptions, SequenceState,
};
use fovea::saliency::SaliencyGrid2D;
use fovea::Execution;

#[derive(Parser)]
#[command(name = "fovea", version, about = "Saliency-guided image magnification")]
struct Cli {
    /// Run every stage on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

/// Per-key overrides applied on top of the config file.
#[derive(Args, Debug, Default)]
struct Overrides {
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    scale: Option<String>,
    #[arg(long)]
    amplitude: Option<String>,
    #[arg(long)]
    bandwidth: Option<String>,
    #[arg(long)]
    alpha: Option<String>,
    #[arg(long)]
    rows: Option<String>,
    #[arg(long)]
    cols: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long = "anti_crop", alias = "anti-crop")]
    anti_crop: Option<String>,
    #[arg(long = "score_weighted", alias = "score-weighted")]
    score_weighted: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long)]
    jitter: Option<String>,
    #[arg(long)]
    prior: Option<String>,
}

impl Overrides {
    fn pairs(&self) -> [(&'static str, &Option<String>); 13] {
        [
            ("mode", &self.mode),
            ("scale", &self.scale),
            ("amplitude", &self.amplitude),
            ("bandwidth", &self.bandwidth),
            ("alpha", &self.alpha),
            ("rows", &self.rows),
            ("cols", &self.cols),
            ("sigma", &self.sigma),
            ("anti_crop", &self.anti_crop),
            ("score_weighted", &self.score_weighted),
            ("seed", &self.seed),
            ("jitter", &self.jitter),
            ("prior", &self.prior),
        ]
    }

    fn resolve(&self, file: Option<&Path>) -> Result<PipelineConfig> {
        let mut cfg = match file {
            Some(p) => PipelineConfig::load(p)?,
            None => PipelineConfig::default(),
        };
        for (key, value) in self.pairs() {
            if let Some(v) = value {
                cfg.set(key, v).with_context(|| format!("--{key}"))?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Warp one image.
    WarpImage {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Previous-frame detections driving `si`/`sc` saliency.
        #[arg(long)]
        boxes: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Magnification map as 16-bit PGM (or CSV by extension).
        #[arg(long)]
        emit_heatmap: Option<PathBuf>,
        #[arg(long)]
        emit_warp: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Warp a directory of frames, feeding each frame's detections to the next.
    Sequence {
        #[arg(long)]
        frames: PathBuf,
        #[arg(long)]
        detections: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Jitter sweep over synthetic scenes.
    SynthEval {
        /// Comma-separated jitter levels in pixels.
        #[arg(long, value_delimiter = ',')]
        jitter_sweep: Option<Vec<f64>>,
        /// Number of scenes, starting at `--seed`.
        #[arg(long, default_value_t = 50)]
        seeds: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Time the pipeline stages.
    Bench {
        #[arg(long, default_value_t = 20)]
        iters: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Build a dataset prior from training annotations.
    BuildPrior {
        #[arg(long)]
        annotations: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1920)]
        width: usize,
        #[arg(long, default_value_t = 1200)]
        height: usize,
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn load_prior(cfg: &PipelineConfig) -> Result<Option<SaliencyGrid2D>> {
    let prior = cfg.prior.as_deref().map(read_prior).transpose()?;
    if prior.is_none() && matches!(cfg.mode, Mode::Sd | Mode::Sc) {
        bail!("mode {} requires --prior", cfg.mode);
    }
    Ok(prior)
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };

    match cli.command {
        Command::WarpImage {
            image,
            config,
            boxes,
            out,
            emit_heatmap,
            emit_warp,
            overrides,
        } => {
            let cfg = overrides.resolve(config.as_deref())?;
            let prior = load_prior(&cfg)?;
            let img = load_image(&image)?;
            let previous = match &boxes {
                Some(p) => ingest_detections(p, img.width(), img.height())?,
                None => DetectionSet::empty(),
            };
            let state = SequenceState {
                previous: Some(previous),
                frame_index: 1,
            };
            let frame = process_frame_with(&img, &state, &cfg, prior.as_ref(), exec)?;
            save_image(&frame.warped, &out)?;
            if let Some(p) = emit_heatmap {
                write_magnification(&frame.magnification, &p)?;
            }
            if let Some(p) = emit_warp {
                write_warp_csv(&frame.warp, &p)?;
            }
        }
        Command::Sequence {
            frames,
            detections,
            out,
            config,
            overrides,
        } => {
            let cfg = overrides.resolve(config.as_deref())?;
            let prior = load_prior(&cfg)?;
            let opts = SequenceOptions {
                frames,
                detections,
                out,
            };
            run_sequence(&opts, &cfg, prior.as_ref(), exec)?;
        }
        Command::SynthEval {
            jitter_sweep,
            seeds,
            out,
            config,
            overrides,
        } => {
            let cfg = overrides.resolve(config.as_deref())?;
            if seeds == 0 {
                bail!("--seeds must be positive");
            }
            let jitters = jitter_sweep.unwrap_or_else(|| DEFAULT_JITTERS.to_vec());
            let spec = SceneSpec::default();
            let rows = synth_eval(cfg.seed, seeds, &jitters, &cfg, &spec, exec)?;
            std::fs::write(&out, synth_csv(&rows))
                .with_context(|| format!("writing {}", out.display()))?;
            for (size, j, mean) in summarize(&rows) {
                println!("box {size:>4} jitter {j:>5}: mean magnification {mean:.6}");
            }
        }
        Command::Bench {
            iters,
            out,
            config,
            overrides,
        } => {
            let cfg = overrides.resolve(config.as_deref())?;
            let report = bench(&cfg, iters, exec)?;
            let csv = report.to_csv();
            std::fs::write(&out, &csv).with_context(|| format!("writing {}", out.display()))?;
            print!("{csv}");
        }
        Command::BuildPrior {
            annotations,
            out,
            width,
            height,
            config,
            overrides,
        } => {
            let cfg = overrides.resolve(config.as_deref())?;
            let grid = build_prior(&annotations, width, height, &cfg)?;
            write_prior(&grid, &out)?;
        }
    }
    Ok(())
}
