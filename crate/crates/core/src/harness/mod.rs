//! Experiment configuration, the named experiment registry, noise synthesis,
//! run orchestration and file output.

pub mod config;
pub mod experiment;
pub mod noise;
pub mod output;
pub mod registry;
pub mod verify;

pub use config::{ExperimentConfig, LChoice, MuSpec, SourceSpec};
pub use experiment::{run_experiment, run_sweep, RunOutput, RunRecord};
