//! Experiment runner for the `hypspec` library: configuration, per-cell execution,
//! exponent fits with targets, and CSV/JSON persistence.

pub mod config;
pub mod error;
pub mod output;
pub mod refit;
pub mod run;
pub mod summary;

pub use config::{parse_config, parse_grid, Experiment, ExperimentConfig};
pub use error::{HarnessError, HarnessResult};
pub use output::{read_summary, write_outputs};
pub use refit::{parse_fit_csv, refit};
pub use run::run_experiment;
pub use summary::{parse_summary, RunSummary};
