//! Histogram density curves and Jensen–Shannon divergence.

use serde::{Deserialize, Serialize};

use super::MetricsError;

pub const DEFAULT_BINS: usize = 100;

/// Equal-width histogram density; `Σ density · width = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityCurve {
    pub lo: f64,
    pub hi: f64,
    pub bin_centers: Vec<f64>,
    pub densities: Vec<f64>,
}

impl DensityCurve {
    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    pub fn width(&self) -> f64 {
        (self.hi - self.lo) / self.bins() as f64
    }

    /// Probability mass per bin.
    pub fn masses(&self) -> Vec<f64> {
        let w = self.width();
        self.densities.iter().map(|d| d * w).collect()
    }

    /// Two-column `center;density` export.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("center;density\n");
        for (c, d) in self.bin_centers.iter().zip(&self.densities) {
            out.push_str(&format!("{c};{d}\n"));
        }
        out
    }

    /// Parses the output of [`DensityCurve::to_csv`]; the grid is recovered from the centers.
    pub fn from_csv(text: &str) -> Result<Self, MetricsError> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("center;density") {
            return Err(MetricsError::Format("expected `center;density` header".into()));
        }
        let mut centers = Vec::new();
        let mut densities = Vec::new();
        for (i, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let (c, d) = line
                .split_once(';')
                .ok_or_else(|| MetricsError::Format(format!("line {}: expected two cells", i + 2)))?;
            let parse = |s: &str| {
                s.trim().parse::<f64>().map_err(|_| MetricsError::Format(format!("line {}: bad number `{s}`", i + 2)))
            };
            centers.push(parse(c)?);
            densities.push(parse(d)?);
        }
        let width = match centers.as_slice() {
            [] => return Err(MetricsError::Empty("density curve")),
            [_] => return Err(MetricsError::Format("single-bin curves do not encode their width".into())),
            [a, b, ..] => b - a,
        };
        Ok(Self {
            lo: centers[0] - width / 2.0,
            hi: centers[centers.len() - 1] + width / 2.0,
            bin_centers: centers,
            densities,
        })
    }
}

/// Values outside `[lo, hi]` are clipped into the edge bins.
pub fn histogram_density(values: &[f64], bins: usize, range: (f64, f64)) -> Result<DensityCurve, MetricsError> {
    let (lo, hi) = range;
    if bins == 0 {
        return Err(MetricsError::Invalid("histogram needs at least one bin".into()));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(MetricsError::Invalid(format!("histogram range ({lo}, {hi}) is empty")));
    }
    if values.is_empty() {
        return Err(MetricsError::Empty("histogram values"));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        if v.is_nan() {
            return Err(MetricsError::NonFinite("histogram values"));
        }
        let b = ((v - lo) / width).floor();
        let b = if b < 0.0 { 0 } else { (b as usize).min(bins - 1) };
        counts[b] += 1;
    }
    let norm = values.len() as f64 * width;
    Ok(DensityCurve {
        lo,
        hi,
        bin_centers: (0..bins).map(|b| lo + (b as f64 + 0.5) * width).collect(),
        densities: counts.iter().map(|&c| c as f64 / norm).collect(),
    })
}

/// Range covering both samples, widened when all values coincide.
pub fn pooled_range(a: &[f64], b: &[f64]) -> Result<(f64, f64), MetricsError> {
    let (lo, hi) = a
        .iter()
        .chain(b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(MetricsError::Empty("pooled values"));
    }
    if lo == hi {
        return Ok((lo - 0.5, hi + 0.5));
    }
    Ok((lo, hi))
}

fn kl_to_mixture(p: &[f64], m: &[f64]) -> f64 {
    p.iter()
        .zip(m)
        .filter(|(pi, _)| **pi > 0.0)
        .map(|(pi, mi)| pi * (pi / mi).log2())
        .sum()
}

/// Base-2 Jensen–Shannon divergence of two probability vectors.
pub fn jsd_masses(p: &[f64], q: &[f64]) -> Result<f64, MetricsError> {
    if p.len() != q.len() {
        return Err(MetricsError::GridMismatch(format!("{} vs {} bins", p.len(), q.len())));
    }
    if p.is_empty() {
        return Err(MetricsError::Empty("distribution"));
    }
    if p.iter().chain(q).any(|v| !v.is_finite() || *v < 0.0) {
        return Err(MetricsError::Invalid("masses must be finite and non-negative".into()));
    }
    let m: Vec<f64> = p.iter().zip(q).map(|(a, b)| 0.5 * (a + b)).collect();
    let js = 0.5 * kl_to_mixture(p, &m) + 0.5 * kl_to_mixture(q, &m);
    Ok(js.clamp(0.0, 1.0))
}

pub fn jsd(p: &DensityCurve, q: &DensityCurve) -> Result<f64, MetricsError> {
    let scale = p.hi.abs().max(p.lo.abs()).max(1.0);
    let same_grid = p.bins() == q.bins()
        && (p.lo - q.lo).abs() <= 1e-9 * scale
        && (p.hi - q.hi).abs() <= 1e-9 * scale;
    if !same_grid {
        return Err(MetricsError::GridMismatch(format!(
            "[{}, {}]×{} vs [{}, {}]×{}",
            p.lo,
            p.hi,
            p.bins(),
            q.lo,
            q.hi,
            q.bins()
        )));
    }
    jsd_masses(&p.masses(), &q.masses())
}
