//! Two-sample Kolmogorov–Smirnov test.

use serde::{Deserialize, Serialize};

use super::MetricsError;

/// Exact permutation p-values are only offered up to this pooled size.
pub const EXACT_MAX_POOLED: usize = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KsMode {
    /// Kolmogorov limiting distribution with the small-sample correction on λ.
    #[default]
    Asymptotic,
    /// Fraction of all label reassignments of the pooled sample with D ≥ D_obs.
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub m: usize,
}

fn check(values: &[f64]) -> Result<(), MetricsError> {
    if values.is_empty() {
        return Err(MetricsError::Empty("KS sample"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite("KS sample"));
    }
    Ok(())
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `n·m·D` as an integer: the largest `|i·m − j·n|` over all thresholds, where
/// `i` and `j` count the values of each sorted sample at or below the threshold.
fn scaled_statistic(a: &[f64], b: &[f64]) -> u64 {
    let (n, m) = (a.len() as i64, b.len() as i64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0i64;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        best = best.max((i as i64 * m - j as i64 * n).abs());
    }
    // Once one sample is exhausted its ECDF is 1 and the gap only shrinks.
    best as u64
}

/// Kolmogorov survival function `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} exp(−2 j² λ²)`.
///
/// For small λ the alternating series converges slowly, so the equivalent
/// theta-function form `1 − (√(2π)/λ) Σ exp(−(2j−1)² π² / (8 λ²))` is used.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let q = if lambda < 1.18 {
        let k = -std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let mut sum = 0.0;
        for j in 1..=50 {
            let odd = (2 * j - 1) as f64;
            let term = (k * odd * odd).exp();
            sum += term;
            if term < 1e-17 {
                break;
            }
        }
        1.0 - (2.0 * std::f64::consts::PI).sqrt() / lambda * sum
    } else {
        let mut sum = 0.0;
        let mut sign = 1.0;
        for j in 1..=100 {
            let jf = j as f64;
            let term = (-2.0 * jf * jf * lambda * lambda).exp();
            sum += sign * term;
            sign = -sign;
            if term < 1e-17 {
                break;
            }
        }
        2.0 * sum
    };
    q.clamp(0.0, 1.0)
}

pub fn asymptotic_p_value(statistic: f64, n: usize, m: usize) -> f64 {
    let ne = (n * m) as f64 / (n + m) as f64;
    let sq = ne.sqrt();
    kolmogorov_survival((sq + 0.12 + 0.11 / sq) * statistic)
}

fn exact_p_value(pooled: &[f64], n: usize, observed: u64) -> f64 {
    let total = pooled.len();
    let mut hits = 0u64;
    let mut count = 0u64;
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(total - n);
    for mask in 0u32..(1u32 << total) {
        if mask.count_ones() as usize != n {
            continue;
        }
        a.clear();
        b.clear();
        for (k, &v) in pooled.iter().enumerate() {
            if mask >> k & 1 == 1 {
                a.push(v);
            } else {
                b.push(v);
            }
        }
        // pooled is sorted, so both halves are too.
        count += 1;
        if scaled_statistic(&a, &b) >= observed {
            hits += 1;
        }
    }
    hits as f64 / count as f64
}

pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<KsResult, MetricsError> {
    ks_two_sample_with(a, b, KsMode::Asymptotic)
}

pub fn ks_two_sample_with(a: &[f64], b: &[f64], mode: KsMode) -> Result<KsResult, MetricsError> {
    check(a)?;
    check(b)?;
    let (sa, sb) = (sorted(a), sorted(b));
    let (n, m) = (a.len(), b.len());
    let scaled = scaled_statistic(&sa, &sb);
    let statistic = scaled as f64 / (n * m) as f64;
    let p_value = match mode {
        KsMode::Asymptotic => asymptotic_p_value(statistic, n, m),
        KsMode::Exact => {
            if n + m > EXACT_MAX_POOLED {
                return Err(MetricsError::ExactTooLarge { pooled: n + m, max: EXACT_MAX_POOLED });
            }
            let mut pooled = sa.clone();
            pooled.extend_from_slice(&sb);
            pooled.sort_by(f64::total_cmp);
            exact_p_value(&pooled, n, scaled)
        }
    };
    Ok(KsResult { statistic, p_value, n, m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_samples() {
        let r = ks_two_sample(&[1.0, 2.0, 3.0], &[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn disjoint_samples() {
        let r = ks_two_sample(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert!(r.p_value < 0.2);
    }

    #[test]
    fn exact_small_case_is_one_third() {
        let r = ks_two_sample_with(&[1.0, 2.0], &[3.0, 4.0], KsMode::Exact).unwrap();
        assert_eq!(r.statistic, 1.0);
        assert_eq!(r.p_value, 1.0 / 3.0);
    }

    #[test]
    fn exact_refuses_large_inputs() {
        let a: Vec<f64> = (0..8).map(f64::from).collect();
        assert!(matches!(
            ks_two_sample_with(&a, &a, KsMode::Exact),
            Err(MetricsError::ExactTooLarge { .. })
        ));
    }

    #[test]
    fn ties_across_samples() {
        // ECDF gap at 1.0: a has 2/4, b has 3/4.
        let r = ks_two_sample(&[1.0, 1.0, 4.0, 4.0], &[1.0, 1.0, 1.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 0.25);
    }

    #[test]
    fn known_statistic() {
        let xs = [0.42, 0.24, 0.86, 0.85, 0.82, 0.82, 0.25, 0.78, 0.13, 0.27];
        let ys = [0.24, 0.27, 0.87, 0.29, 0.57, 0.44, 0.5, 0.00, 0.56, 0.03];
        assert!((ks_two_sample(&xs, &ys).unwrap().statistic - 0.4).abs() < 1e-12);
    }

    #[test]
    fn survival_function_branches_agree() {
        for lambda in [0.3, 0.8, 1.0, 1.17, 1.19, 1.5, 2.5] {
            let alt = {
                let mut s = 0.0;
                for j in 1..200 {
                    let jf = j as f64;
                    s += if j % 2 == 1 { 1.0 } else { -1.0 } * (-2.0 * jf * jf * lambda * lambda).exp();
                }
                (2.0 * s).clamp(0.0, 1.0)
            };
            assert!((kolmogorov_survival(lambda) - alt).abs() < 1e-10, "λ = {lambda}");
        }
        assert_eq!(kolmogorov_survival(0.0), 1.0);
        assert!(kolmogorov_survival(0.05) > 0.999999);
        // Q(1.36) ≈ 0.05, the familiar 5 % critical value.
        assert!((kolmogorov_survival(1.358) - 0.05).abs() < 1e-3);
    }

    #[test]
    fn rejects_empty_and_nan() {
        assert!(ks_two_sample(&[], &[1.0]).is_err());
        assert!(ks_two_sample(&[f64::NAN], &[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_monotone_invariant(
            a in proptest::collection::vec(-50.0f64..50.0, 1..40),
            b in proptest::collection::vec(-50.0f64..50.0, 1..40),
        ) {
            let r = ks_two_sample(&a, &b).unwrap();
            let s = ks_two_sample(&b, &a).unwrap();
            prop_assert_eq!(r.statistic, s.statistic);
            prop_assert_eq!(r.p_value, s.p_value);
            let f = |v: &f64| (v / 10.0).exp() * 3.0 - 1.0;
            let ta: Vec<f64> = a.iter().map(f).collect();
            let tb: Vec<f64> = b.iter().map(f).collect();
            prop_assert_eq!(ks_two_sample(&ta, &tb).unwrap().statistic, r.statistic);
            prop_assert!((0.0..=1.0).contains(&r.statistic));
            prop_assert!((0.0..=1.0).contains(&r.p_value));
        }
    }
}
