//! Experiment harness around `rydvqa-core`: configuration, seeding, the four
//! numerical studies, file formats and single-point replay.

pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod replay;
pub mod seeds;

pub use config::{EngineKind, Experiment, ExperimentConfig};
pub use error::{Error, Result};
pub use experiments::{run, ExperimentOutput};
