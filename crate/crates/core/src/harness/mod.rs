//! Experiment orchestration: alignment studies, augmentation runs, ablations and reports.

pub mod alignment;
pub mod config;
pub mod experiment;
pub mod fixtures;
pub mod report;

use std::path::PathBuf;

use thiserror::Error;

use crate::classifier::ClassifierError;
use crate::ingest::IngestError;
use crate::kinematics::KinematicsError;
use crate::metrics::MetricsError;
use crate::windowing::WindowingError;

pub use alignment::{run_alignment, AlignmentConfig, AlignmentRun};
pub use config::{derive_seed, fingerprint, BaselineConfig, ExperimentConfig, MetricOptions, WindowConfig};
pub use experiment::{run_ablation_quantity, run_experiment, run_single, ExperimentReport, IterationResult, RunSummary, SingleRun};
pub use fixtures::{generate_fixture, FixtureManifests, FixtureSpec};
pub use report::{emit_report, Report, ReportFormat};

/// Coarse error class, mapped one-to-one onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Numeric,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Config => 2,
            ErrorKind::Data => 3,
            ErrorKind::Numeric => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("i/o error on {}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Kinematics(#[from] KinematicsError),
    #[error(transparent)]
    Windowing(#[from] WindowingError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

impl HarnessError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            HarnessError::Config(_) => ErrorKind::Config,
            HarnessError::Data(_) | HarnessError::Io { .. } | HarnessError::Ingest(_) => ErrorKind::Data,
            HarnessError::Kinematics(KinematicsError::NonFinite { .. }) => ErrorKind::Numeric,
            HarnessError::Kinematics(_) => ErrorKind::Data,
            HarnessError::Windowing(WindowingError::InvalidMix(_)) => ErrorKind::Config,
            HarnessError::Windowing(_) => ErrorKind::Data,
            HarnessError::Metrics(MetricsError::NonFinite(_)) => ErrorKind::Numeric,
            HarnessError::Metrics(_) => ErrorKind::Data,
            HarnessError::Classifier(ClassifierError::NonFinite { .. }) => ErrorKind::Numeric,
            HarnessError::Classifier(ClassifierError::Config(_)) => ErrorKind::Config,
            HarnessError::Classifier(ClassifierError::Metrics(MetricsError::NonFinite(_))) => ErrorKind::Numeric,
            HarnessError::Classifier(_) => ErrorKind::Data,
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.kind().exit_code()
    }
}
