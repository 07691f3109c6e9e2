//! Batch driver: configuration, experiment stages, artifact manifests.

pub mod config;
pub mod manifest;
pub mod stages;

use benard_core::bounds::BoundsError;
use benard_core::cell::CellError;
use benard_core::fields::FieldError;
use benard_core::homogenization::HomogenizationError;
use benard_core::meanfield::MeanFieldError;
use benard_core::snapshot::SnapshotError;
use benard_core::solver::SolverError;
use thiserror::Error;

pub use config::{parse_config, ConfigError, ConfigErrors, ExperimentConfig};
pub use stages::{pipeline_full, PipelineOutput, Stage};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration:\n{0}")]
    Config(ConfigErrors),
    #[error("{0}")]
    Usage(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o: {0}")]
    Io(String),
    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: Stage,
        #[source]
        source: Box<CliError>,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
            CliError::Stage { source, .. } => source.exit_code(),
        }
    }

    pub fn in_stage(self, stage: Stage) -> Self {
        match self {
            e @ CliError::Stage { .. } => e,
            e => CliError::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }
}

impl From<config::LoadError> for CliError {
    fn from(e: config::LoadError) -> Self {
        match e {
            config::LoadError::Io(..) => CliError::Io(e.to_string()),
            config::LoadError::Invalid(errs) => CliError::Config(errs),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<SnapshotError> for CliError {
    fn from(e: SnapshotError) -> Self {
        match e {
            SnapshotError::Field(f) => f.into(),
            e => CliError::Io(e.to_string()),
        }
    }
}

impl From<FieldError> for CliError {
    fn from(e: FieldError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidParams(_) | SolverError::BadEpsList => CliError::Usage(e.to_string()),
            SolverError::Snapshot(s) => s.into(),
            SolverError::Io(io) => io.into(),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<CellError> for CliError {
    fn from(e: CellError) -> Self {
        match e {
            CellError::InvalidParams(_) | CellError::SampleMismatch { .. } => CliError::Usage(e.to_string()),
            CellError::Snapshot(s) => s.into(),
            CellError::Io(io) => io.into(),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<HomogenizationError> for CliError {
    fn from(e: HomogenizationError) -> Self {
        match e {
            HomogenizationError::Parse { .. } => CliError::Usage(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<MeanFieldError> for CliError {
    fn from(e: MeanFieldError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<BoundsError> for CliError {
    fn from(e: BoundsError) -> Self {
        match e {
            BoundsError::InvalidParams(_) | BoundsError::InvalidSpec(_) => CliError::Usage(e.to_string()),
            e => CliError::Numerical(e.to_string()),
        }
    }
}
