//! Minibatch training loop with early stopping on validation loss.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::adam::{Adam, AdamConfig};
use super::network::{bce, forward, labels_of, loss_and_gradients, update_running_stats, Mode, SequenceBatch};
use super::params::{Model, Scalar};
use super::ClassifierError;
use crate::metrics::{classification_metrics, ClassificationMetrics, DEFAULT_THRESHOLD};
use crate::windowing::Window;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch_size: usize,
    pub shuffle: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { learning_rate: 1e-3, max_epochs: 250, patience: 50, batch_size: 64, shuffle: true, seed: 0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ClassifierError> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(ClassifierError::Config(format!("learning rate must be positive, got {}", self.learning_rate)));
        }
        if self.max_epochs == 0 {
            return Err(ClassifierError::Config("max_epochs must be at least 1".into()));
        }
        if self.patience > self.max_epochs {
            return Err(ClassifierError::Config(format!(
                "patience {} exceeds max_epochs {}",
                self.patience, self.max_epochs
            )));
        }
        if self.batch_size == 0 {
            return Err(ClassifierError::Config("batch_size must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    EarlyStop,
    MaxEpochs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub train_loss: Vec<f64>,
    pub val_loss: Vec<f64>,
    pub val_f1: Vec<f64>,
    /// Zero-based index into the per-epoch vectors.
    pub best_epoch: usize,
    pub stop_reason: StopReason,
}

impl TrainHistory {
    pub fn epochs(&self) -> usize {
        self.train_loss.len()
    }

    /// `epoch;train_loss;val_loss;val_f1` with one-based epoch numbers.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch;train_loss;val_loss;val_f1\n");
        for i in 0..self.epochs() {
            out.push_str(&format!("{};{:.8};{:.8};{:.6}\n", i + 1, self.train_loss[i], self.val_loss[i], self.val_f1[i]));
        }
        out
    }
}

/// Patience counter. Only a strictly lower loss counts as an improvement.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    waited: usize,
    seen: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self { patience, best: f64::INFINITY, best_epoch: 0, waited: 0, seen: 0 }
    }

    /// Records one epoch's loss. Returns `(improved, stop)`.
    pub fn observe(&mut self, loss: f64) -> (bool, bool) {
        let epoch = self.seen;
        self.seen += 1;
        if loss < self.best {
            self.best = loss;
            self.best_epoch = epoch;
            self.waited = 0;
            (true, false)
        } else {
            self.waited += 1;
            (false, self.waited >= self.patience)
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_loss(&self) -> f64 {
        self.best
    }
}

fn to_f64<T: Scalar>(v: &[T]) -> Vec<f64> {
    v.iter().map(|x| x.to_f64().unwrap_or(f64::NAN)).collect()
}

/// Eval-mode fall probabilities.
pub fn predict(model: &Model, windows: &[Window]) -> Result<Vec<f64>, ClassifierError> {
    let batch = SequenceBatch::<f32>::from_windows(windows)?;
    Ok(to_f64(&forward(model, &batch, Mode::Eval)?))
}

fn validation_pass(
    model: &Model,
    batch: &SequenceBatch<f32>,
    labels: &[u8],
    threshold: f64,
) -> Result<(f64, ClassificationMetrics), ClassifierError> {
    let probs = forward(model, batch, Mode::Eval)?;
    let loss = bce(&to_f64(&probs), labels);
    Ok((loss, classification_metrics(&to_f64(&probs), labels, threshold)?))
}

/// Trains from `initial` and returns the parameters of the best validation-loss epoch.
///
/// Windows must already be standardized.
pub fn train(
    initial: &Model,
    train_windows: &[Window],
    val_windows: &[Window],
    config: &TrainConfig,
) -> Result<(Model, TrainHistory), ClassifierError> {
    config.validate()?;
    if train_windows.is_empty() {
        return Err(ClassifierError::EmptyInput("training set"));
    }
    if val_windows.is_empty() {
        return Err(ClassifierError::EmptyInput("validation set"));
    }
    let x_train = SequenceBatch::<f32>::from_windows(train_windows)?;
    let y_train = labels_of(train_windows);
    let x_val = SequenceBatch::<f32>::from_windows(val_windows)?;
    let y_val = labels_of(val_windows);
    if x_val.steps() != x_train.steps() {
        return Err(ClassifierError::Shape(format!(
            "validation windows have {} steps, training windows {}",
            x_val.steps(),
            x_train.steps()
        )));
    }

    let mut model = initial.clone();
    let mut best = model.clone();
    let mut adam = Adam::new(model.arch, AdamConfig { learning_rate: config.learning_rate, ..AdamConfig::default() });
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..x_train.len()).collect();
    let mut stopper = EarlyStopping::new(config.patience);
    let mut history = TrainHistory {
        train_loss: Vec::new(),
        val_loss: Vec::new(),
        val_f1: Vec::new(),
        best_epoch: 0,
        stop_reason: StopReason::MaxEpochs,
    };

    for epoch in 0..config.max_epochs {
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0;
        for idx in order.chunks(config.batch_size) {
            let labels: Vec<u8> = idx.iter().map(|&i| y_train[i]).collect();
            let step = loss_and_gradients(&model, &x_train.select(idx), &labels)?;
            adam.step(&mut model.weights, &step.gradients);
            update_running_stats(&mut model, &step.batch_stats);
            if !model.all_finite() {
                return Err(ClassifierError::NonFinite { layer: "parameters" });
            }
            loss_sum += step.loss as f64 * idx.len() as f64;
        }
        let (val_loss, val_metrics) = validation_pass(&model, &x_val, &y_val, DEFAULT_THRESHOLD)?;
        history.train_loss.push(loss_sum / x_train.len() as f64);
        history.val_loss.push(val_loss);
        history.val_f1.push(val_metrics.f1);
        log::debug!("epoch {}: train {:.5} val {:.5} f1 {:.3}", epoch + 1, loss_sum / x_train.len() as f64, val_loss, val_metrics.f1);

        let (improved, stop) = stopper.observe(val_loss);
        if improved {
            best.clone_from(&model);
        }
        if stop {
            history.stop_reason = StopReason::EarlyStop;
            break;
        }
    }
    history.best_epoch = stopper.best_epoch();
    Ok((best, history))
}

/// Eval-mode forward followed by the confusion-matrix metrics.
pub fn evaluate(model: &Model, windows: &[Window], threshold: f64) -> Result<ClassificationMetrics, ClassifierError> {
    if windows.is_empty() {
        return Err(ClassifierError::EmptyInput("test set"));
    }
    let probs = predict(model, windows)?;
    Ok(classification_metrics(&probs, &labels_of(windows), threshold)?)
}
