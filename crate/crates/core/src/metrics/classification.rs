//! Confusion counts, precision, recall and F1 for the fall class.

use serde::{Deserialize, Serialize};

use super::MetricsError;

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

impl ClassificationMetrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Self {
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(tp, tp + fp);
        let recall = ratio(tp, tp + fn_);
        let f1 = if precision + recall > 0.0 {
            2.0 * precision * recall / (precision + recall)
        } else {
            0.0
        };
        Self { precision, recall, f1, tp, fp, fn_, tn }
    }
}

/// Predicts a fall iff `probability ≥ threshold`.
pub fn classification_metrics(
    probabilities: &[f64],
    labels: &[u8],
    threshold: f64,
) -> Result<ClassificationMetrics, MetricsError> {
    if probabilities.len() != labels.len() {
        return Err(MetricsError::LengthMismatch(probabilities.len(), labels.len()));
    }
    if probabilities.is_empty() {
        return Err(MetricsError::Empty("predictions"));
    }
    if let Some(p) = probabilities.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(MetricsError::Invalid(format!("probability {p} outside [0, 1]")));
    }
    let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
    for (&p, &y) in probabilities.iter().zip(labels) {
        match (p >= threshold, y != 0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    Ok(ClassificationMetrics::from_counts(tp, fp, fn_, tn))
}

/// Signed percentage change of `augmented` over `baseline`, rounded to two decimals.
pub fn percent_delta(baseline_f1: f64, augmented_f1: f64) -> Result<f64, MetricsError> {
    if !(baseline_f1.is_finite() && baseline_f1 > 0.0) {
        return Err(MetricsError::Invalid(format!("baseline F1 must be positive, got {baseline_f1}")));
    }
    let raw = 100.0 * (augmented_f1 - baseline_f1) / baseline_f1;
    Ok((raw * 100.0).round() / 100.0)
}

/// `+56.83%` style rendering.
pub fn format_delta(delta: f64) -> String {
    if delta >= 0.0 {
        format!("+{delta:.2}%")
    } else {
        format!("{delta:.2}%")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_predictions() {
        let m = classification_metrics(&[0.9, 0.1, 0.7, 0.2], &[1, 0, 1, 0], 0.5).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn two_thirds() {
        // TP=2, FP=1, FN=1, TN=1
        let m = classification_metrics(&[0.9, 0.8, 0.6, 0.1, 0.2], &[1, 1, 0, 1, 0], 0.5).unwrap();
        assert_eq!((m.tp, m.fp, m.fn_, m.tn), (2, 1, 1, 1));
        assert!((m.precision - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.recall - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.f1 - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn all_negative_predictions() {
        let m = classification_metrics(&[0.1, 0.2, 0.3], &[1, 1, 0], 0.5).unwrap();
        assert_eq!(m.f1, 0.0);
        assert_eq!(m.precision, 0.0);
    }

    #[test]
    fn threshold_is_inclusive() {
        let m = classification_metrics(&[0.5, 0.5], &[1, 0], 0.5).unwrap();
        assert_eq!((m.tp, m.fp), (1, 1));
        assert_eq!(m.recall, 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(classification_metrics(&[0.1], &[1, 0], 0.5), Err(MetricsError::LengthMismatch(1, 2))));
        assert!(classification_metrics(&[], &[], 0.5).is_err());
        assert!(classification_metrics(&[1.5], &[1], 0.5).is_err());
        assert!(percent_delta(0.0, 0.5).is_err());
    }

    #[test]
    fn table_deltas() {
        assert_eq!(percent_delta(0.542, 0.850).unwrap(), 56.83);
        assert_eq!(percent_delta(0.740, 0.710).unwrap(), -4.05);
        assert_eq!(percent_delta(0.7, 0.7).unwrap(), 0.0);
        assert_eq!(format_delta(56.83), "+56.83%");
        assert_eq!(format_delta(-4.05), "-4.05%");
    }

    proptest! {
        #[test]
        fn matches_bruteforce(rows in proptest::collection::vec((0.0f64..=1.0, 0u8..2), 1..500), t in 0.0f64..1.0) {
            let (p, y): (Vec<f64>, Vec<u8>) = rows.into_iter().unzip();
            let m = classification_metrics(&p, &y, t).unwrap();
            let count = |pred: bool, truth: u8| p.iter().zip(&y).filter(|(pi, yi)| (**pi >= t) == pred && **yi == truth).count();
            prop_assert_eq!((m.tp, m.fp, m.fn_, m.tn), (count(true, 1), count(true, 0), count(false, 1), count(false, 0)));
        }

        #[test]
        fn delta_of_equal_is_zero(b in 1e-6f64..10.0) {
            prop_assert_eq!(percent_delta(b, b).unwrap(), 0.0);
        }
    }
}
