//! Configuration, experiment orchestration, artifacts and self-tests.

pub mod config;
pub mod experiment;
pub mod verify;

pub use config::{load_config, ExperimentConfig, RunMode, OUTPUT_DIR_ENV};
pub use experiment::{
    compute_stats, emit_plot_data, plot_data, read_summary, run_experiment, sync_summary, write_summary,
    EstimationSummary, RunSummary, StatsReport, SyncSummary,
};
pub use verify::{bilinear_direct, run_verify_suites, VerifyReport};
