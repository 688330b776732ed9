//! Config-driven orchestration: one TOML config per experiment, outputs as
//! CSV profiles with JSON sidecars, SVG plots and a `run_report.json`
//! manifest.

pub mod config;
pub mod output;
pub mod plot;
pub mod run;

pub use config::{apply_override, ExperimentConfig, ExperimentKind, OUTPUT_DIR_ENV};
pub use output::{ManifestEntry, OutputSink, ProfileSidecar};
pub use plot::{emit_plots, read_profile_csv, render_svg};
pub use run::{input_hash, run, CalibrationRow, CheckOutcome, RunReport, REPORT_FILE};
