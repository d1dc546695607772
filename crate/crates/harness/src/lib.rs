//! Experiment driver: configuration, the tomography pipeline and its
//! output files.

pub mod config;
pub mod error;
pub mod output;
pub mod pipeline;

pub use config::{ExperimentConfig, InstanceConfig};
pub use error::HarnessError;
pub use pipeline::{ramsey_report, run_pipeline, PipelineRun, ReportBundle};
