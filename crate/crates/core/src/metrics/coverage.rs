//! k-NN coverage of a real sample set by a synthetic one.

use rayon::prelude::*;

use super::MetricsError;

pub const DEFAULT_K: usize = 5;

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Distance from each real point to its k-th nearest other real point.
pub fn knn_radii(real: &[Vec<f64>], k: usize) -> Result<Vec<f64>, MetricsError> {
    if k == 0 {
        return Err(MetricsError::Invalid("coverage needs k ≥ 1".into()));
    }
    if real.len() <= k {
        return Err(MetricsError::Invalid(format!("coverage needs more than k = {k} real samples, got {}", real.len())));
    }
    Ok(real
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let mut d: Vec<f64> = real
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, o)| euclidean(r, o))
                .collect();
            let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect())
}

/// Fraction of real points whose k-NN ball contains at least one synthetic point.
pub fn coverage(real: &[Vec<f64>], synthetic: &[Vec<f64>], k: usize) -> Result<f64, MetricsError> {
    if synthetic.is_empty() {
        return Err(MetricsError::Empty("synthetic set"));
    }
    let dim = real.first().map_or(0, Vec::len);
    if real.iter().chain(synthetic).any(|v| v.len() != dim) {
        return Err(MetricsError::Invalid("all samples must share one dimension".into()));
    }
    if real.iter().chain(synthetic).flatten().any(|v| !v.is_finite()) {
        return Err(MetricsError::NonFinite("coverage samples"));
    }
    let radii = knn_radii(real, k)?;
    let covered = real
        .par_iter()
        .zip(&radii)
        .filter(|(r, radius)| synthetic.iter().any(|s| euclidean(r, s) <= **radius))
        .count();
    Ok(covered as f64 / real.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(n: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect()
    }

    #[test]
    fn self_coverage_is_one() {
        let real = cloud(20, 6, 1);
        assert_eq!(coverage(&real, &real, 5).unwrap(), 1.0);
    }

    #[test]
    fn far_translation_is_zero() {
        let real = cloud(20, 6, 2);
        let far: Vec<Vec<f64>> = real.iter().map(|v| v.iter().map(|x| x + 100.0).collect()).collect();
        assert_eq!(coverage(&real, &far, 5).unwrap(), 0.0);
    }

    #[test]
    fn radii_in_one_dimension() {
        let real: Vec<Vec<f64>> = [0.0, 1.0, 3.0, 7.0].iter().map(|&x| vec![x]).collect();
        assert_eq!(knn_radii(&real, 1).unwrap(), vec![1.0, 1.0, 2.0, 4.0]);
        assert_eq!(knn_radii(&real, 2).unwrap(), vec![3.0, 2.0, 3.0, 6.0]);
        // Synthetic point at 5 lies within 3's 2-NN ball (radius 3) and 7's (radius 6).
        assert_eq!(coverage(&real, &[vec![5.0]], 2).unwrap(), 0.5);
    }

    #[test]
    fn invariances() {
        let real = cloud(25, 4, 3);
        let syn = cloud(25, 4, 4);
        let base = coverage(&real, &syn, 3).unwrap();
        let mut shuffled = syn.clone();
        shuffled.reverse();
        let mut real_rev = real.clone();
        real_rev.rotate_left(7);
        assert_eq!(coverage(&real_rev, &shuffled, 3).unwrap(), base);
        let shift = |s: &[Vec<f64>]| s.iter().map(|v| v.iter().map(|x| x + 8.0).collect()).collect::<Vec<Vec<f64>>>();
        assert_eq!(coverage(&shift(&real), &shift(&syn), 3).unwrap(), base);
        // Reflection of one axis plus a coordinate swap.
        let rotate = |s: &[Vec<f64>]| {
            s.iter().map(|v| vec![-v[1], v[0], v[3], v[2]]).collect::<Vec<Vec<f64>>>()
        };
        assert_eq!(coverage(&rotate(&real), &rotate(&syn), 3).unwrap(), base);
    }

    #[test]
    fn argument_errors() {
        let real = cloud(5, 2, 5);
        assert!(coverage(&real, &real, 5).is_err());
        assert!(coverage(&real, &real, 0).is_err());
        assert!(coverage(&real, &[], 2).is_err());
        assert!(coverage(&real, &[vec![0.0]], 2).is_err());
    }
}
