//! Experiment harness for gradient EM: a TOML config drives data
//! generation, loss certification, repeated gradient EM runs and the
//! theory checks, and the results land in `report.json`, `trace.csv` and
//! `plot.csv`.

pub mod config;
pub mod experiment;

pub use config::{validate_config, ConfigError, ExperimentConfig};
pub use experiment::{compute_bounds, run_experiment, ExperimentReport, RepetitionReport};
