//! File formats and pipelines for the `subsum` command-line tool.

pub mod format;
pub mod report;
pub mod run;

pub use format::{ProbabilityModel, SubspaceProblem, TraceRow};
pub use report::{Artifact, Payload, Report};
pub use run::{exit_code, run, write_artifacts, Command, RunConfig, RunOutput, TensorMode};
