//! Configuration, detection ingestion, per-sequence state, file emission,
//! the synthetic evaluation harness, and the benchmark timer.

pub mod bench;
pub mod config;
pub mod detections;
pub mod frame;
pub mod io;
pub mod sequence;
pub mod synth;

pub use bench::{bench, BenchReport, TimingRow};
pub use config::{Mode, PipelineConfig};
pub use detections::{detections_to_json, ingest_detections, parse_detections};
pub use frame::{process_frame, process_frame_with, update_state, FrameOutput, SequenceState};
pub use sequence::{build_prior, list_frames, run_sequence, SequenceOptions};
pub use synth::{
    generate_scene, run_scenario, summarize, synth_csv, synth_eval, SceneSpec, SynthRow,
};
