//! Experiment configuration, its fingerprint and per-iteration seed derivation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::HarnessError;
use crate::classifier::{Architecture, TrainConfig};
use crate::kinematics::Differencing;
use crate::metrics::{Normalization, DEFAULT_BINS, DEFAULT_K, DEFAULT_THRESHOLD};
use crate::windowing::{MixSpec, SplitSizes, DEFAULT_STRIDE, DEFAULT_WINDOW};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub size: usize,
    pub stride: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { size: DEFAULT_WINDOW, stride: DEFAULT_STRIDE }
    }
}

impl WindowConfig {
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.size == 0 || self.stride == 0 {
            return Err(HarnessError::Config(format!("window size and stride must be positive, got {self:?}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricOptions {
    pub bins: usize,
    pub k: usize,
    pub threshold: f64,
    pub normalization: Normalization,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS, k: DEFAULT_K, threshold: DEFAULT_THRESHOLD, normalization: Normalization::Pooled }
    }
}

/// Reference run on real data only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub enabled: bool,
    /// Master seed of the baseline run. `None` reuses the experiment seed, so both
    /// runs see the same subject splits; any other value gives an unpaired comparison.
    pub seed: Option<u64>,
    pub mix: MixSpec,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { enabled: false, seed: None, mix: MixSpec::BASELINE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Manifest of the real dataset (ADL and falls, all subjects).
    pub manifest: PathBuf,
    /// Synthetic fall manifests; several are pooled by concatenation.
    pub synthetic_manifests: Vec<PathBuf>,
    pub window: WindowConfig,
    pub mix: MixSpec,
    pub split: SplitSizes,
    pub iterations: usize,
    pub seed: u64,
    pub baseline: BaselineConfig,
    pub model: Architecture,
    /// Training hyperparameters. Its `seed` is replaced by a per-iteration seed.
    pub train: TrainConfig,
    pub metrics: MetricOptions,
    /// Scheme for motion-array (`.npy`) manifest entries.
    pub differencing: Differencing,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            manifest: PathBuf::new(),
            synthetic_manifests: Vec::new(),
            window: WindowConfig::default(),
            mix: MixSpec::AUGMENTED,
            split: SplitSizes::default(),
            iterations: 5,
            seed: 0,
            baseline: BaselineConfig::default(),
            model: Architecture::default(),
            train: TrainConfig::default(),
            metrics: MetricOptions::default(),
            differencing: Differencing::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(format!("invalid experiment config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        Self::from_json(&text)
    }

    /// Relative manifest paths are taken relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() && !p.as_os_str().is_empty() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.manifest);
        self.synthetic_manifests.iter_mut().for_each(fix);
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.iterations == 0 {
            return Err(HarnessError::Config("iterations must be at least 1".into()));
        }
        if self.manifest.as_os_str().is_empty() {
            return Err(HarnessError::Config("no real-data manifest given".into()));
        }
        for m in std::iter::once(&self.manifest).chain(&self.synthetic_manifests) {
            if !m.is_file() {
                return Err(HarnessError::Config(format!("manifest {} does not exist", m.display())));
            }
        }
        self.window.validate()?;
        self.mix.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.baseline.mix.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.split.train == 0 || self.split.validation == 0 || self.split.test == 0 {
            return Err(HarnessError::Config(format!("every split needs at least one subject, got {:?}", self.split)));
        }
        if self.model.hidden == 0 || self.model.dense == 0 {
            return Err(HarnessError::Config(format!("layer sizes must be positive, got {:?}", self.model)));
        }
        self.train.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        let m = &self.metrics;
        if !(0.0..=1.0).contains(&m.threshold) {
            return Err(HarnessError::Config(format!("threshold must lie in [0, 1], got {}", m.threshold)));
        }
        if m.bins == 0 || m.k == 0 {
            return Err(HarnessError::Config("bins and k must be positive".into()));
        }
        Ok(())
    }

    pub fn fingerprint(&self) -> String {
        fingerprint(self)
    }
}

/// First 16 hex digits of the SHA-256 of the value's JSON serialization.
pub fn fingerprint<T: Serialize>(value: &T) -> String {
    let json = serde_json::to_vec(value).expect("configuration serializes");
    hex::encode(&Sha256::digest(&json)[..8])
}

/// `hash(master, i, tag)`, so iteration `i` and each of its random streams get
/// independent seeds that do not depend on how many iterations run.
pub fn derive_seed(master: u64, iteration: u64, tag: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update(iteration.to_le_bytes());
    h.update(tag.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest has 32 bytes"))
}
