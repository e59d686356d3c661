//! Configuration, experiments and report files for the `bcoh` command-line tool.

pub mod config;
pub mod experiments;
pub mod report;

use bcoh_core::eightmodel::GeometryError;
use bcoh_core::induce::InduceError;
use thiserror::Error;

pub use config::{CochainDescriptor, ExperimentConfig, GeometrySource};
pub use experiments::{converge_sweep, qm_table, regions_table, volume_class_eval, ConvergenceRow};

#[derive(Debug, Error)]
pub enum LabError {
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("configuration: {0}")]
    Config(String),
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("integrator: {0}")]
    Integrator(InduceError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl From<InduceError> for LabError {
    fn from(e: InduceError) -> Self {
        match e {
            InduceError::Geometry(g) => LabError::Geometry(g),
            other => LabError::Integrator(other),
        }
    }
}

impl LabError {
    /// Process exit status for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Invariant(_) => 1,
            LabError::Config(_) | LabError::Io(_) => 2,
            LabError::Geometry(_) => 3,
            LabError::Integrator(_) => 4,
        }
    }
}
