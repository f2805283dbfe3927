//! Real-vs-synthetic alignment statistics and classification metrics.

pub mod classification;
pub mod coverage;
pub mod density;
pub mod ks;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::windowing::{fit_scaler, Window};

pub use classification::{classification_metrics, format_delta, percent_delta, ClassificationMetrics, DEFAULT_THRESHOLD};
pub use coverage::{coverage, knn_radii, DEFAULT_K};
pub use density::{histogram_density, jsd, jsd_masses, pooled_range, DensityCurve, DEFAULT_BINS};
pub use ks::{ks_two_sample, ks_two_sample_with, KsMode, KsResult};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("{0} contains non-finite values")]
    NonFinite(&'static str),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("histogram grids differ: {0}")]
    GridMismatch(String),
    #[error("exact KS mode supports at most {max} pooled samples, got {pooled}")]
    ExactTooLarge { pooled: usize, max: usize },
    #[error("{0}")]
    Invalid(String),
    #[error("format error: {0}")]
    Format(String),
}

/// How values are z-scored before histogramming.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// One mean/std over all real values of all axes; the three axes form one population.
    #[default]
    Pooled,
    /// Per-axis mean/std from the real set; one curve and JSD per axis.
    PerAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentOptions {
    pub bins: usize,
    pub k: usize,
    pub normalization: Normalization,
}

impl Default for AlignmentOptions {
    fn default() -> Self {
        Self { bins: DEFAULT_BINS, k: DEFAULT_K, normalization: Normalization::Pooled }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisDensities {
    pub axis: char,
    pub jsd: f64,
    pub real: DensityCurve,
    pub synthetic: DensityCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub real_windows: usize,
    pub synthetic_windows: usize,
    /// KS test per axis (x, y, z).
    pub ks: [KsResult; 3],
    /// Arithmetic mean of the three per-axis p-values.
    pub ks_mean_p_value: f64,
    pub ks_mean_statistic: f64,
    /// Pooled JSD, or the mean of per-axis JSDs in per-axis mode.
    pub jsd: f64,
    pub coverage: f64,
    pub options: AlignmentOptions,
    pub real_density: DensityCurve,
    pub synthetic_density: DensityCurve,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub per_axis: Vec<AxisDensities>,
}

fn axis_values(windows: &[Window], axis: usize) -> Vec<f64> {
    windows.iter().flat_map(|w| w.values.iter().map(move |v| v[axis])).collect()
}

fn density_pair(real: &[f64], synthetic: &[f64], bins: usize) -> Result<(DensityCurve, DensityCurve, f64), MetricsError> {
    let range = pooled_range(real, synthetic)?;
    let r = histogram_density(real, bins, range)?;
    let s = histogram_density(synthetic, bins, range)?;
    let d = jsd(&r, &s)?;
    Ok((r, s, d))
}

/// Computes every alignment statistic for two window sets of equal width.
pub fn align_windows(real: &[Window], synthetic: &[Window], options: &AlignmentOptions) -> Result<AlignmentReport, MetricsError> {
    if real.is_empty() {
        return Err(MetricsError::Empty("real window set"));
    }
    if synthetic.is_empty() {
        return Err(MetricsError::Empty("synthetic window set"));
    }
    let width = real[0].len();
    if real.iter().chain(synthetic).any(|w| w.len() != width) {
        return Err(MetricsError::Invalid("real and synthetic windows must share one width".into()));
    }

    let axis_scaler = fit_scaler(real).map_err(|e| MetricsError::Invalid(e.to_string()))?;
    let scaled = |ws: &[Window], axis: usize, mean: f64, std: f64| -> Vec<f64> {
        axis_values(ws, axis).into_iter().map(|v| (v - mean) / std).collect()
    };

    let mut ks = Vec::with_capacity(3);
    for axis in 0..3 {
        let (m, s) = (axis_scaler.mean[axis], axis_scaler.std[axis]);
        ks.push(ks_two_sample(&scaled(real, axis, m, s), &scaled(synthetic, axis, m, s))?);
    }
    let ks: [KsResult; 3] = ks.try_into().expect("three axes");

    let (real_density, synthetic_density, jsd_value, per_axis) = match options.normalization {
        Normalization::Pooled => {
            let all: Vec<f64> = (0..3).flat_map(|a| axis_values(real, a)).collect();
            let n = all.len() as f64;
            let mean = all.iter().sum::<f64>() / n;
            let std = (all.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt().max(crate::windowing::SCALER_EPSILON);
            let pool = |ws: &[Window]| -> Vec<f64> { (0..3).flat_map(|a| scaled(ws, a, mean, std)).collect() };
            let (r, s, d) = density_pair(&pool(real), &pool(synthetic), options.bins)?;
            (r, s, d, Vec::new())
        }
        Normalization::PerAxis => {
            let mut per_axis = Vec::with_capacity(3);
            for (axis, name) in ['x', 'y', 'z'].into_iter().enumerate() {
                let (m, s) = (axis_scaler.mean[axis], axis_scaler.std[axis]);
                let (r, syn, d) = density_pair(&scaled(real, axis, m, s), &scaled(synthetic, axis, m, s), options.bins)?;
                per_axis.push(AxisDensities { axis: name, jsd: d, real: r, synthetic: syn });
            }
            let mean_jsd = per_axis.iter().map(|a| a.jsd).sum::<f64>() / 3.0;
            (per_axis[0].real.clone(), per_axis[0].synthetic.clone(), mean_jsd, per_axis)
        }
    };

    let embed = |ws: &[Window]| -> Vec<Vec<f64>> {
        ws.iter()
            .map(|w| w.values.iter().flat_map(|&v| axis_scaler.transform(v)).collect())
            .collect()
    };
    let coverage_value = coverage(&embed(real), &embed(synthetic), options.k)?;

    Ok(AlignmentReport {
        real_windows: real.len(),
        synthetic_windows: synthetic.len(),
        ks_mean_p_value: ks.iter().map(|r| r.p_value).sum::<f64>() / 3.0,
        ks_mean_statistic: ks.iter().map(|r| r.statistic).sum::<f64>() / 3.0,
        ks,
        jsd: jsd_value,
        coverage: coverage_value,
        options: *options,
        real_density,
        synthetic_density,
        per_axis,
    })
}
