//! Medoid-based k-means over an arbitrary distance matrix.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ClusterLabels, ClusteringError, DistanceMatrix};

pub const MAX_ITERATIONS: usize = 100;

/// Outcome of one k-medoids run, including the objective after every
/// assignment/update round.
#[derive(Debug, Clone)]
pub struct KMedoidsRun {
    pub labels: ClusterLabels,
    pub medoids: Vec<usize>,
    pub objective_trace: Vec<f64>,
    pub iterations: usize,
}

pub fn kmedoids(dm: &DistanceMatrix, k: usize, seed: u64) -> Result<ClusterLabels, ClusteringError> {
    kmedoids_run(dm, k, seed).map(|r| r.labels)
}

/// Seeded D²-weighted medoid sampling, then alternating assignment and
/// medoid update until a fixpoint or [`MAX_ITERATIONS`].
pub fn kmedoids_run(dm: &DistanceMatrix, k: usize, seed: u64) -> Result<KMedoidsRun, ClusteringError> {
    let n = dm.len();
    if k == 0 {
        return Err(ClusteringError::ZeroClusters);
    }
    if k > n {
        return Err(ClusteringError::TooManyClusters { k, n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut medoids = init_medoids(dm, k, &mut rng);

    let mut assignment = assign(dm, &medoids);
    let mut trace = vec![objective(dm, &medoids, &assignment)];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let updated = update_medoids(dm, &medoids, &assignment);
        if updated == medoids {
            break;
        }
        medoids = updated;
        assignment = assign(dm, &medoids);
        trace.push(objective(dm, &medoids, &assignment));
    }
    Ok(KMedoidsRun {
        labels: ClusterLabels::from_raw(&assignment),
        medoids,
        objective_trace: trace,
        iterations,
    })
}

fn init_medoids(dm: &DistanceMatrix, k: usize, rng: &mut impl Rng) -> Vec<usize> {
    let n = dm.len();
    let mut medoids = vec![rng.gen_range(0..n)];
    let mut nearest: Vec<f64> = (0..n).map(|i| dm.get(i, medoids[0])).collect();
    while medoids.len() < k {
        let weights: Vec<f64> = (0..n)
            .map(|i| if medoids.contains(&i) { 0.0 } else { nearest[i] * nearest[i] })
            .collect();
        let next = match WeightedIndex::new(&weights) {
            Ok(w) => w.sample(rng),
            Err(_) => {
                // Every remaining point sits on a medoid: pick uniformly.
                let free: Vec<usize> = (0..n).filter(|i| !medoids.contains(i)).collect();
                free[rng.gen_range(0..free.len())]
            }
        };
        medoids.push(next);
        for (i, d) in nearest.iter_mut().enumerate() {
            *d = d.min(dm.get(i, next));
        }
    }
    medoids
}

/// Index into `medoids` for every point. A medoid always keeps itself, so no
/// cluster is ever empty; other ties go to the earlier medoid.
fn assign(dm: &DistanceMatrix, medoids: &[usize]) -> Vec<usize> {
    (0..dm.len())
        .map(|i| {
            if let Some(pos) = medoids.iter().position(|&m| m == i) {
                return pos;
            }
            let mut best = 0;
            for (c, &m) in medoids.iter().enumerate().skip(1) {
                if dm.get(i, m) < dm.get(i, medoids[best]) {
                    best = c;
                }
            }
            best
        })
        .collect()
}

fn update_medoids(dm: &DistanceMatrix, medoids: &[usize], assignment: &[usize]) -> Vec<usize> {
    (0..medoids.len())
        .map(|c| {
            let members: Vec<usize> = (0..dm.len()).filter(|&i| assignment[i] == c).collect();
            let cost = |cand: usize| members.iter().map(|&j| dm.get(cand, j)).sum::<f64>();
            let mut best = medoids[c];
            let mut best_cost = cost(best);
            for &cand in &members {
                let cc = cost(cand);
                if cc < best_cost {
                    best = cand;
                    best_cost = cc;
                }
            }
            best
        })
        .collect()
}

fn objective(dm: &DistanceMatrix, medoids: &[usize], assignment: &[usize]) -> f64 {
    assignment.iter().enumerate().map(|(i, &c)| dm.get(i, medoids[c])).sum()
}
