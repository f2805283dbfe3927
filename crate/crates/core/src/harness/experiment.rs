//! Repeated train/test runs over random subject splits and training mixes.

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{derive_seed, ExperimentConfig};
use super::HarnessError;
use crate::classifier::{evaluate, train, Model, ModelParams, StopReason, TrainConfig, TrainHistory};
use crate::ingest::DatasetCatalog;
use crate::kinematics::{Label, Provenance};
use crate::metrics::{percent_delta, ClassificationMetrics};
use crate::windowing::{apply_scaler, compose_training_mix, fit_scaler, plan_mix, split_subjects, window_all, MixSpec, SubjectSplit, Window};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationResult {
    pub iteration: usize,
    pub seed: u64,
    pub split: SubjectSplit,
    /// ADL, real-fall and synthetic-fall windows in the training mix.
    pub mix_counts: [usize; 3],
    /// Synthetic training windows per source name.
    pub synthetic_sources: Vec<(String, usize)>,
    pub validation_windows: usize,
    pub test_windows: usize,
    pub epochs: usize,
    pub best_epoch: usize,
    pub stop_reason: StopReason,
    pub metrics: ClassificationMetrics,
}

/// One condition (augmented or baseline) over all iterations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub mix: MixSpec,
    pub master_seed: u64,
    pub iterations: Vec<IterationResult>,
    pub mean_precision: f64,
    pub mean_recall: f64,
    /// Arithmetic mean of the per-iteration F1 scores.
    pub mean_f1: f64,
}

impl RunSummary {
    fn new(mix: MixSpec, master_seed: u64, iterations: Vec<IterationResult>) -> Self {
        let n = iterations.len() as f64;
        let mean = |f: fn(&ClassificationMetrics) -> f64| iterations.iter().map(|r| f(&r.metrics)).sum::<f64>() / n;
        Self {
            mix,
            master_seed,
            mean_precision: mean(|m| m.precision),
            mean_recall: mean(|m| m.recall),
            mean_f1: mean(|m| m.f1),
            iterations,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub fingerprint: String,
    pub config: ExperimentConfig,
    pub augmented: RunSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<RunSummary>,
    /// Whether the baseline used the same subject splits as the augmented run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub paired: Option<bool>,
    /// Percentage change of the augmented mean F1 over the baseline mean F1.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub percent_delta: Option<f64>,
}

impl ExperimentReport {
    pub fn mean_f1(&self) -> f64 {
        self.augmented.mean_f1
    }
}

/// Every window of the experiment, loaded once and shared by all iterations.
struct WindowPools {
    real: Vec<Window>,
    synthetic_falls: Vec<Window>,
    subjects: BTreeSet<String>,
}

fn load_windows(catalog: &DatasetCatalog, config: &ExperimentConfig) -> Result<Vec<Window>, HarnessError> {
    let series = catalog
        .entries()
        .par_iter()
        .map(|e| e.load_series(config.differencing))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(window_all(&series, config.window.size, config.window.stride))
}

fn load_pools(config: &ExperimentConfig) -> Result<WindowPools, HarnessError> {
    let real_catalog = DatasetCatalog::load(&config.manifest)?;
    if let Some(e) = real_catalog.entries().iter().find(|e| e.provenance != Provenance::Real) {
        return Err(HarnessError::Data(format!("{} in the real manifest is marked synthetic", e.path.display())));
    }
    let subjects = real_catalog.subjects();
    let real = load_windows(&real_catalog, config)?;

    let mut synthetic_falls = Vec::new();
    for path in &config.synthetic_manifests {
        let catalog = DatasetCatalog::load(path)?;
        let windows = load_windows(&catalog, config)?;
        synthetic_falls.extend(windows.into_iter().filter(|w| w.label() == Label::Fall));
    }
    log::info!(
        "{} real windows from {} subjects, {} synthetic fall windows",
        real.len(),
        subjects.len(),
        synthetic_falls.len()
    );
    Ok(WindowPools { real, synthetic_falls, subjects })
}

fn in_split<'a>(windows: &'a [Window], subjects: &'a BTreeSet<String>) -> impl Iterator<Item = &'a Window> + 'a {
    windows.iter().filter(move |w| w.subject().is_some_and(|s| subjects.contains(s)))
}

fn run_iteration(
    pools: &WindowPools,
    config: &ExperimentConfig,
    mix: &MixSpec,
    master_seed: u64,
    iteration: usize,
) -> Result<(IterationResult, Model, TrainHistory), HarnessError> {
    let seed = derive_seed(master_seed, iteration as u64, "iteration");
    let split = split_subjects(&pools.subjects, config.split, derive_seed(seed, 0, "split"))?;

    let (mut adl, mut real_fall) = (Vec::new(), Vec::new());
    for w in in_split(&pools.real, &split.train) {
        match w.label() {
            Label::Adl => adl.push(w.clone()),
            Label::Fall => real_fall.push(w.clone()),
        }
    }
    let mix_counts = plan_mix([adl.len(), real_fall.len(), pools.synthetic_falls.len()], mix)?;
    let train_raw = compose_training_mix(&adl, &real_fall, &pools.synthetic_falls, mix, derive_seed(seed, 0, "mix"))?;
    let mut sources = std::collections::BTreeMap::<String, usize>::new();
    for w in train_raw.iter().filter(|w| w.provenance() == Provenance::Synthetic) {
        *sources.entry(w.source().to_string()).or_default() += 1;
    }

    let val_raw: Vec<Window> = in_split(&pools.real, &split.validation).cloned().collect();
    let test_raw: Vec<Window> = in_split(&pools.real, &split.test).cloned().collect();
    if val_raw.is_empty() || test_raw.is_empty() {
        return Err(HarnessError::Data(format!("iteration {iteration}: validation or test subjects have no windows")));
    }

    let scaler = fit_scaler(&train_raw)?;
    let (train_set, val_set, test_set) =
        (apply_scaler(&scaler, &train_raw), apply_scaler(&scaler, &val_raw), apply_scaler(&scaler, &test_raw));

    let model = ModelParams::init(config.model, derive_seed(seed, 0, "init"));
    let train_config = TrainConfig { seed: derive_seed(seed, 0, "train"), ..config.train.clone() };
    let (model, history) = train(&model, &train_set, &val_set, &train_config)?;
    let metrics = evaluate(&model, &test_set, config.metrics.threshold)?;
    log::info!("iteration {iteration}: F1 {:.4} after {} epochs", metrics.f1, history.epochs());

    let result = IterationResult {
        iteration,
        seed,
        split,
        mix_counts,
        synthetic_sources: sources.into_iter().collect(),
        validation_windows: val_set.len(),
        test_windows: test_set.len(),
        epochs: history.epochs(),
        best_epoch: history.best_epoch,
        stop_reason: history.stop_reason,
        metrics,
    };
    Ok((result, model, history))
}

fn run_condition(pools: &WindowPools, config: &ExperimentConfig, mix: &MixSpec, master_seed: u64) -> Result<RunSummary, HarnessError> {
    // Iterations are independent; results are collected in iteration order.
    let results = (0..config.iterations)
        .into_par_iter()
        .map(|i| run_iteration(pools, config, mix, master_seed, i).map(|(r, _, _)| r))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunSummary::new(*mix, master_seed, results))
}

/// Model and history of a single iteration, for exporting a checkpoint.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub result: IterationResult,
    pub model: Model,
    pub history: TrainHistory,
}

/// Trains and evaluates iteration 0 of the configured experiment only.
pub fn run_single(config: &ExperimentConfig) -> Result<SingleRun, HarnessError> {
    config.validate()?;
    let pools = load_pools(config)?;
    check_subjects(&pools, config)?;
    let (result, model, history) = run_iteration(&pools, config, &config.mix, config.seed, 0)?;
    Ok(SingleRun { result, model, history })
}

fn check_subjects(pools: &WindowPools, config: &ExperimentConfig) -> Result<(), HarnessError> {
    if pools.subjects.len() != config.split.total() {
        return Err(HarnessError::Data(format!(
            "{} subjects available but the split sizes add up to {}",
            pools.subjects.len(),
            config.split.total()
        )));
    }
    Ok(())
}

fn run_named(name: &str, config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    config.validate()?;
    let pools = load_pools(config)?;
    check_subjects(&pools, config)?;
    let augmented = run_condition(&pools, config, &config.mix, config.seed)?;
    let (baseline, paired, delta) = if config.baseline.enabled {
        let seed = config.baseline.seed.unwrap_or(config.seed);
        let base = run_condition(&pools, config, &config.baseline.mix, seed)?;
        let delta = percent_delta(base.mean_f1, augmented.mean_f1).ok();
        if delta.is_none() {
            log::warn!("baseline mean F1 is 0; no percentage change reported");
        }
        (Some(base), Some(seed == config.seed), delta)
    } else {
        (None, None, None)
    };
    Ok(ExperimentReport {
        name: name.to_string(),
        fingerprint: config.fingerprint(),
        config: config.clone(),
        augmented,
        baseline,
        paired,
        percent_delta: delta,
    })
}

/// Runs the configured mix for every iteration, plus the baseline when enabled.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    run_named("experiment", config)
}

/// Same mechanics with the 50/10/40 mix; all synthetic manifests are pooled.
pub fn run_ablation_quantity(config: &ExperimentConfig) -> Result<ExperimentReport, HarnessError> {
    let config = ExperimentConfig { mix: MixSpec::QUANTITY_ABLATION, ..config.clone() };
    run_named("ablate_quantity", &config)
}
