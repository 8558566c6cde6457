//! Density-based clustering over a precomputed distance matrix.

use super::{ClusterLabels, ClusteringError, DistanceMatrix};

/// Role of a point under a given `(eps, min_neighbors)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointKind {
    Core,
    Border,
    Noise,
}

/// The ε-neighborhood of `i`, excluding `i` itself.
pub fn neighbors(dm: &DistanceMatrix, i: usize, eps: f64) -> Vec<usize> {
    (0..dm.len()).filter(|&j| j != i && dm.get(i, j) <= eps).collect()
}

pub fn classify(dm: &DistanceMatrix, eps: f64, min_neighbors: usize) -> Vec<PointKind> {
    let hoods: Vec<Vec<usize>> = (0..dm.len()).map(|i| neighbors(dm, i, eps)).collect();
    let core: Vec<bool> = hoods.iter().map(|h| h.len() >= min_neighbors).collect();
    (0..dm.len())
        .map(|i| {
            if core[i] {
                PointKind::Core
            } else if hoods[i].iter().any(|&j| core[j]) {
                PointKind::Border
            } else {
                PointKind::Noise
            }
        })
        .collect()
}

/// Core points reachable through chains of core neighbors share a cluster.
/// A border point joins the cluster of its nearest core neighbor (earliest
/// index on ties). Each noise point becomes its own singleton cluster.
pub fn dbscan(
    dm: &DistanceMatrix,
    eps: f64,
    min_neighbors: usize,
) -> Result<ClusterLabels, ClusteringError> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(ClusteringError::BadEps(eps));
    }
    if min_neighbors == 0 {
        return Err(ClusteringError::BadMinNeighbors);
    }
    let n = dm.len();
    let hoods: Vec<Vec<usize>> = (0..n).map(|i| neighbors(dm, i, eps)).collect();
    let core: Vec<bool> = hoods.iter().map(|h| h.len() >= min_neighbors).collect();

    let mut raw: Vec<Option<usize>> = vec![None; n];
    let mut next = 0;
    for start in 0..n {
        if !core[start] || raw[start].is_some() {
            continue;
        }
        raw[start] = Some(next);
        let mut stack = vec![start];
        while let Some(p) = stack.pop() {
            for &q in &hoods[p] {
                if core[q] && raw[q].is_none() {
                    raw[q] = Some(next);
                    stack.push(q);
                }
            }
        }
        next += 1;
    }
    for i in 0..n {
        if core[i] {
            continue;
        }
        let nearest_core = hoods[i]
            .iter()
            .copied()
            .filter(|&j| core[j])
            .min_by(|&a, &b| dm.get(i, a).total_cmp(&dm.get(i, b)).then(a.cmp(&b)));
        raw[i] = match nearest_core {
            Some(j) => raw[j],
            None => {
                next += 1;
                Some(next - 1)
            }
        };
    }
    let raw: Vec<usize> = raw.into_iter().map(|l| l.expect("every point labeled")).collect();
    Ok(ClusterLabels::from_raw(&raw))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(pos: &[f64]) -> DistanceMatrix {
        DistanceMatrix::from_fn(pos.len(), |i, j| (pos[i] - pos[j]).abs())
    }

    #[test]
    fn sparse_points_are_singletons() {
        let dm = line(&[0.0, 10.0, 20.0, 30.0]);
        let labels = dbscan(&dm, 5.0, 1).unwrap();
        assert_eq!(labels.num_clusters(), 4);
    }

    /// Reachability closure computed with a Floyd–Warshall style sweep.
    fn brute_force_core_components(dm: &DistanceMatrix, eps: f64, min: usize) -> Vec<Vec<bool>> {
        let n = dm.len();
        let core: Vec<bool> =
            (0..n).map(|i| (0..n).filter(|&j| j != i && dm.get(i, j) <= eps).count() >= min).collect();
        let mut reach = vec![vec![false; n]; n];
        for i in 0..n {
            for j in 0..n {
                reach[i][j] = i == j || (core[i] && core[j] && dm.get(i, j) <= eps);
            }
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        reach
    }

    #[test]
    fn dense_chain_forms_one_cluster() {
        let pos: Vec<f64> = (0..9).map(|i| i as f64 * 0.9).collect();
        let dm = line(&pos);
        let labels = dbscan(&dm, 1.0, 2).unwrap();
        let reach = brute_force_core_components(&dm, 1.0, 2);
        // interior points are core and mutually reachable
        for i in 1..8 {
            for j in 1..8 {
                assert!(reach[i][j]);
            }
        }
        assert_eq!(labels.num_clusters(), 1);
    }

    #[test]
    fn border_point_joins_core_cluster() {
        // 0,1,2 dense; 3 is within eps of 2 only.
        let dm = line(&[0.0, 0.5, 1.0, 1.9, 10.0]);
        let kinds = classify(&dm, 1.0, 2);
        assert_eq!(kinds[3], PointKind::Border);
        assert_eq!(kinds[4], PointKind::Noise);
        let labels = dbscan(&dm, 1.0, 2).unwrap();
        assert_eq!(labels.get(3), labels.get(2));
        assert_ne!(labels.get(4), labels.get(0));
        assert_eq!(labels.num_clusters(), 2);
    }

    #[test]
    fn rejects_bad_parameters() {
        let dm = line(&[0.0, 1.0]);
        assert!(matches!(dbscan(&dm, 0.0, 1), Err(ClusteringError::BadEps(_))));
        assert!(matches!(dbscan(&dm, 1.0, 0), Err(ClusteringError::BadMinNeighbors)));
    }

    #[test]
    fn matches_brute_force_on_small_random_lines() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(1..=10);
            let pos: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..10.0)).collect();
            let dm = line(&pos);
            let eps = rng.gen_range(0.2..3.0);
            let min = rng.gen_range(1..=4);
            let labels = dbscan(&dm, eps, min).unwrap();
            let reach = brute_force_core_components(&dm, eps, min);
            let kinds = classify(&dm, eps, min);
            for i in 0..n {
                for j in 0..n {
                    if kinds[i] == PointKind::Core && kinds[j] == PointKind::Core {
                        assert_eq!(labels.get(i) == labels.get(j), reach[i][j]);
                    }
                }
                if kinds[i] == PointKind::Noise {
                    assert_eq!(labels.members(labels.get(i)).len(), 1);
                }
            }
        }
    }
}
