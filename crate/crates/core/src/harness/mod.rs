//! Experiment orchestration: test cases, studies and CSV output.

pub mod config;
pub mod csv;
pub mod experiment;

pub use config::{ExperimentConfig, MeshWidth, TestCase};
pub use csv::emit_csv;
pub use experiment::{
    channel_geometry, check_caccioppoli, oversampling_study, run_experiment, run_oracle, run_training, ChannelKind,
    ExperimentOutcome, StudyRow,
};
