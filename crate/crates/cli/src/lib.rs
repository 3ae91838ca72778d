//! Library side of the `ogp` binary: report emission and experiment sweeps.

pub mod experiment;
pub mod output;

pub use experiment::{
    rerun_manifest, run_experiment, ExperimentConfig, ExperimentError, Manifest, Mismatch, SeedRange, TaskKind,
    TaskRecord, TaskStatus,
};
pub use output::{emit, emit_report, format_f64, to_csv, to_json, Format, Tabular};
