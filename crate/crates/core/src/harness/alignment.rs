//! Real-vs-synthetic alignment study on fall windows.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::config::{fingerprint, WindowConfig};
use super::HarnessError;
use crate::ingest::DatasetCatalog;
use crate::kinematics::{Differencing, Label};
use crate::metrics::{align_windows, AlignmentOptions, AlignmentReport};
use crate::windowing::{window_all, Window};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlignmentConfig {
    pub real_manifest: PathBuf,
    pub synthetic_manifest: PathBuf,
    pub window: WindowConfig,
    pub options: AlignmentOptions,
    pub differencing: Differencing,
}

impl Default for AlignmentConfig {
    fn default() -> Self {
        Self {
            real_manifest: PathBuf::new(),
            synthetic_manifest: PathBuf::new(),
            window: WindowConfig::default(),
            options: AlignmentOptions::default(),
            differencing: Differencing::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentRun {
    pub fingerprint: String,
    pub config: AlignmentConfig,
    pub report: AlignmentReport,
}

fn fall_windows(manifest: &std::path::Path, config: &AlignmentConfig, side: &str) -> Result<Vec<Window>, HarnessError> {
    let catalog = DatasetCatalog::load(manifest)?;
    let series = catalog
        .entries()
        .iter()
        .filter(|e| e.activity == Label::Fall)
        .map(|e| e.load_series(config.differencing))
        .collect::<Result<Vec<_>, _>>()?;
    if series.is_empty() {
        return Err(HarnessError::Data(format!("{side} manifest {} has no fall series", manifest.display())));
    }
    let windows = window_all(&series, config.window.size, config.window.stride);
    if windows.is_empty() {
        return Err(HarnessError::Data(format!(
            "{side} fall series are all shorter than the window size {}",
            config.window.size
        )));
    }
    Ok(windows)
}

/// Windows the fall series of both manifests and compares them.
pub fn run_alignment(config: &AlignmentConfig) -> Result<AlignmentRun, HarnessError> {
    config.window.validate()?;
    let real = fall_windows(&config.real_manifest, config, "real")?;
    let synthetic = fall_windows(&config.synthetic_manifest, config, "synthetic")?;
    let report = align_windows(&real, &synthetic, &config.options)?;
    Ok(AlignmentRun { fingerprint: fingerprint(config), config: config.clone(), report })
}
