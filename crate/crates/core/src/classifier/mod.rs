//! LSTM fall classifier trained from scratch.
//!
//! Training runs in `f32`. Every routine is generic over [`Scalar`] so the
//! same code can be checked in `f64` against finite differences.

pub mod adam;
pub mod checkpoint;
pub mod network;
pub mod params;
pub mod train;

use thiserror::Error;

use crate::metrics::MetricsError;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use network::{bce, forward, labels_of, loss_and_gradients, LossAndGradients, Mode, SequenceBatch};
pub use params::{init_model, Architecture, Model, ModelParams, ParamSet, Scalar, PARAM_NAMES};
pub use train::{evaluate, predict, train, EarlyStopping, StopReason, TrainConfig, TrainHistory};

#[derive(Debug, Error)]
pub enum ClassifierError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("{0} is empty")]
    EmptyInput(&'static str),
    #[error("non-finite values in layer `{layer}`")]
    NonFinite { layer: &'static str },
    #[error("invalid training configuration: {0}")]
    Config(String),
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}
