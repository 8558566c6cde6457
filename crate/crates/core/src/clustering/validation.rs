use super::{ClusterLabels, ClusteringError, DistanceMatrix};

/// Per-point silhouette scores with their mean.
#[derive(Debug, Clone, PartialEq)]
pub struct Silhouette {
    pub scores: Vec<f64>,
    pub mean: f64,
}

/// Standard `(b − a) / max(a, b)` silhouette.
///
/// Points in singleton clusters score 0, and so does every point when there
/// is a single cluster (no neighboring cluster exists).
pub fn silhouette(dm: &DistanceMatrix, labels: &ClusterLabels) -> Silhouette {
    let n = dm.len();
    let k = labels.num_clusters();
    let sizes: Vec<usize> = (0..k).map(|c| labels.members(c).len()).collect();
    let scores: Vec<f64> = (0..n)
        .map(|i| {
            let own = labels.get(i);
            if sizes[own] <= 1 || k <= 1 {
                return 0.0;
            }
            let mut sums = vec![0.0; k];
            for j in 0..n {
                if j != i {
                    sums[labels.get(j)] += dm.get(i, j);
                }
            }
            let a = sums[own] / (sizes[own] - 1) as f64;
            let b = (0..k)
                .filter(|&c| c != own)
                .map(|c| sums[c] / sizes[c] as f64)
                .fold(f64::INFINITY, f64::min);
            let denom = a.max(b);
            if denom > 0.0 {
                (b - a) / denom
            } else {
                0.0
            }
        })
        .collect();
    let mean = if n == 0 { 0.0 } else { scores.iter().sum::<f64>() / n as f64 };
    Silhouette { scores, mean }
}

/// Gini index of silhouette scores after shifting them from `[−1, 1]` to
/// `[0, 2]`: `Σᵢⱼ |xᵢ − xⱼ| / (2 n² · mean)`, or 0 when the mean is 0.
pub fn gini(scores: &[f64]) -> Result<f64, ClusteringError> {
    if scores.is_empty() {
        return Err(ClusteringError::EmptyScores);
    }
    let n = scores.len() as f64;
    let mut shifted: Vec<f64> = scores.iter().map(|s| s + 1.0).collect();
    shifted.sort_by(f64::total_cmp);
    let mean = shifted.iter().sum::<f64>() / n;
    if mean <= 0.0 {
        return Ok(0.0);
    }
    // Σᵢⱼ |xᵢ − xⱼ| over sorted values is 2 Σᵢ (2i − n + 1) xᵢ.
    let pair_sum: f64 = shifted
        .iter()
        .enumerate()
        .map(|(i, x)| (2.0 * i as f64 - n + 1.0) * x)
        .sum::<f64>()
        * 2.0;
    Ok((pair_sum / (2.0 * n * n * mean)).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_gini(scores: &[f64]) -> f64 {
        let x: Vec<f64> = scores.iter().map(|s| s + 1.0).collect();
        let n = x.len() as f64;
        let mean = x.iter().sum::<f64>() / n;
        if mean == 0.0 {
            return 0.0;
        }
        let mut s = 0.0;
        for a in &x {
            for b in &x {
                s += (a - b).abs();
            }
        }
        s / (2.0 * n * n * mean)
    }

    #[test]
    fn gini_examples() {
        assert_eq!(gini(&[0.3, 0.3, 0.3]).unwrap(), 0.0);
        assert!((gini(&[-1.0, 1.0]).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(gini(&[0.7]).unwrap(), 0.0);
        assert_eq!(gini(&[-1.0, -1.0]).unwrap(), 0.0);
        assert!(matches!(gini(&[]), Err(ClusteringError::EmptyScores)));
    }

    #[test]
    fn gini_matches_pairwise_definition() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let n = rng.gen_range(1..30);
            let s: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let g = gini(&s).unwrap();
            assert!((g - naive_gini(&s)).abs() < 1e-9);
            assert!((0.0..=1.0).contains(&g));
        }
    }

    #[test]
    fn singletons_score_zero() {
        let dm = DistanceMatrix::from_fn(4, |i, j| (i + j) as f64);
        let s = silhouette(&dm, &ClusterLabels::from_raw(&[0, 1, 2, 3]));
        assert!(s.scores.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn perfectly_separated_clusters_score_one() {
        let dm = DistanceMatrix::from_fn(4, |i, j| if i / 2 == j / 2 { 0.0 } else { 5.0 });
        let s = silhouette(&dm, &ClusterLabels::from_raw(&[0, 0, 1, 1]));
        assert!(s.scores.iter().all(|&x| x == 1.0));
        assert_eq!(s.mean, 1.0);
    }

    #[test]
    fn random_labelings_stay_in_range() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        for _ in 0..300 {
            let n = rng.gen_range(1..15);
            let vals: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.gen_range(0.0..10.0)).collect()).collect();
            let dm = DistanceMatrix::from_fn(n, |i, j| vals[i][j]);
            let k = rng.gen_range(1..=n);
            let raw: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let s = silhouette(&dm, &ClusterLabels::from_raw(&raw));
            assert!(s.scores.iter().all(|x| (-1.0..=1.0).contains(x)));
        }
    }
}
