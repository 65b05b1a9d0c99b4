//! Batch experiment runner: named presets, Cartesian sweeps, CSV output and
//! a checksummed run manifest.
//!
//! Configuration is TOML. A file names a preset and overrides any subset of
//! that preset's defaults:
//!
//! ```toml
//! preset = "fig4b"
//! seeds = [0, 1, 2, 3]
//! t1_min_grid = [1e-7, 1e-5]
//!
//! [ensemble]
//! n_tls = 100
//! ```

mod config;
mod manifest;
mod plot;
mod run;

pub use config::{apply_axis, log_grid, BulkConfig, ExperimentConfig, LossSweepConfig, Preset, SweepAxis};
pub use manifest::{FileEntry, RunManifest, SeedFailure, MANIFEST_FILE};
pub use plot::emit_plot_data;
pub use run::{read_heatmap_csv, run_preset, sweep, HeatmapRow, Summary};

/// Environment variable that overrides the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "TLSGAP_OUTPUT_DIR";
