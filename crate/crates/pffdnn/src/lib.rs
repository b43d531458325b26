//! Experiment harness for `pffdnn-core`: configuration, orchestration of
//! single fits and Δω sweeps, CSV logs, SVG plots and the `pffdnn` CLI.

pub mod config;
mod error;
pub mod plot;
pub mod records;
pub mod run;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use run::{dump_samples, dump_signal, run_fit, run_sweep, FitRun, SweepRun, Threaded};
