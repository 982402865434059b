//! Experiment runner for the multiuser diversity simulator: configuration
//! intake, the N sweep and CSV/plot-data emission.

pub mod config;
pub mod error;
pub mod plot;
pub mod sweep;

pub use config::{parse_config, ExperimentConfig, Occupancy, SweepArgs};
pub use error::CliError;
pub use plot::emit_plot_data;
pub use sweep::{run_sweep, write_sweep_csv, SweepRow, CSV_HEADER};
