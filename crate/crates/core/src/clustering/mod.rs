//! Clustering over precomputed distance matrices, plus silhouette/Gini
//! driven hyper-parameter selection.

mod dbscan;
mod kmedoids;
mod matrix;
mod validation;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dbscan::{classify, dbscan, neighbors, PointKind};
pub use kmedoids::{kmedoids, kmedoids_run, KMedoidsRun, MAX_ITERATIONS};
pub use matrix::DistanceMatrix;
pub use validation::{gini, silhouette, Silhouette};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ClusteringError {
    #[error("cannot form {k} clusters from {n} points")]
    TooManyClusters { k: usize, n: usize },
    #[error("number of clusters must be positive")]
    ZeroClusters,
    #[error("eps must be positive, got {0}")]
    BadEps(f64),
    #[error("min_neighbors must be at least 1")]
    BadMinNeighbors,
    #[error("cannot compute a Gini index of no scores")]
    EmptyScores,
    #[error("hyper-parameter grid is empty: {0}")]
    EmptyGrid(String),
}

/// One cluster id per point, contiguous from 0 and numbered in order of
/// first appearance.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterLabels {
    labels: Vec<usize>,
    num_clusters: usize,
}

impl ClusterLabels {
    /// Renumbers arbitrary labels by first appearance.
    pub fn from_raw(raw: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let labels: Vec<usize> = raw
            .iter()
            .map(|r| {
                let next = map.len();
                *map.entry(*r).or_insert(next)
            })
            .collect();
        ClusterLabels { num_clusters: map.len(), labels }
    }

    pub fn single(n: usize) -> Self {
        ClusterLabels { labels: vec![0; n], num_clusters: usize::from(n > 0) }
    }

    pub fn get(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == cluster).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ClusterAlgo {
    /// Medoid-based variant; named after k-means in configuration files.
    #[serde(alias = "kmedoids")]
    Kmeans,
    #[default]
    Dbscan,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "lowercase")]
pub enum HyperParams {
    Kmeans { k: usize },
    Dbscan { eps: f64, min_neighbors: usize },
}

/// Ranges explored by [`select_hyperparams`]. Defaults: `k ∈ [1, 70]`,
/// `eps ∈ [2, 10]`, `min_neighbors ∈ [1, 5]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperParamGrid {
    pub algo: ClusterAlgo,
    pub k_range: (usize, usize),
    pub eps_range: (f64, f64),
    /// `None` picks 1.0 for integer-valued matrices and 0.5 otherwise.
    pub eps_step: Option<f64>,
    pub min_neighbors_range: (usize, usize),
}

impl Default for HyperParamGrid {
    fn default() -> Self {
        HyperParamGrid {
            algo: ClusterAlgo::Dbscan,
            k_range: (1, 70),
            eps_range: (2.0, 10.0),
            eps_step: None,
            min_neighbors_range: (1, 5),
        }
    }
}

impl HyperParamGrid {
    pub fn with_algo(mut self, algo: ClusterAlgo) -> Self {
        self.algo = algo;
        self
    }

    /// Grid points in evaluation order for a matrix of `n` points. `k` is
    /// clamped to `[1, n]`.
    pub fn points(&self, dm: &DistanceMatrix) -> Result<Vec<HyperParams>, ClusteringError> {
        let n = dm.len();
        let points: Vec<HyperParams> = match self.algo {
            ClusterAlgo::Kmeans => {
                let (lo, hi) = self.k_range;
                let lo = lo.max(1);
                if lo > hi {
                    return Err(ClusteringError::EmptyGrid(format!("k range {lo}..={hi}")));
                }
                let hi = hi.min(n);
                if lo > hi {
                    vec![HyperParams::Kmeans { k: n.max(1) }]
                } else {
                    (lo..=hi).map(|k| HyperParams::Kmeans { k }).collect()
                }
            }
            ClusterAlgo::Dbscan => {
                let (lo, hi) = self.eps_range;
                let step = self
                    .eps_step
                    .unwrap_or(if dm.is_integer_valued() { 1.0 } else { 0.5 });
                if !(lo > 0.0 && hi >= lo && step > 0.0) {
                    return Err(ClusteringError::EmptyGrid(format!(
                        "eps range {lo}..={hi} step {step}"
                    )));
                }
                let (mlo, mhi) = self.min_neighbors_range;
                if mlo == 0 || mlo > mhi {
                    return Err(ClusteringError::EmptyGrid(format!(
                        "min_neighbors range {mlo}..={mhi}"
                    )));
                }
                let steps = ((hi - lo) / step + 1e-9).floor() as usize;
                let mut out = Vec::new();
                for s in 0..=steps {
                    let eps = lo + s as f64 * step;
                    for min_neighbors in mlo..=mhi {
                        out.push(HyperParams::Dbscan { eps, min_neighbors });
                    }
                }
                out
            }
        };
        Ok(points)
    }
}

pub fn run_clustering(
    dm: &DistanceMatrix,
    params: HyperParams,
    seed: u64,
) -> Result<ClusterLabels, ClusteringError> {
    match params {
        HyperParams::Kmeans { k } => kmedoids(dm, k, seed),
        HyperParams::Dbscan { eps, min_neighbors } => dbscan(dm, eps, min_neighbors),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridEvaluation {
    pub params: HyperParams,
    pub mean_silhouette: f64,
    pub gini: f64,
    pub num_clusters: usize,
    /// A single cluster: silhouette is undefined and scored as 0.
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct Selection {
    pub params: HyperParams,
    pub labels: ClusterLabels,
    pub chosen: GridEvaluation,
    pub evaluations: Vec<GridEvaluation>,
    /// Indices into `evaluations` of the non-dominated points.
    pub front: Vec<usize>,
}

/// `a` dominates `b` when its silhouette is no lower, its Gini no higher, and
/// one of the two is strictly better.
fn dominates(a: &GridEvaluation, b: &GridEvaluation) -> bool {
    a.mean_silhouette >= b.mean_silhouette
        && a.gini <= b.gini
        && (a.mean_silhouette > b.mean_silhouette || a.gini < b.gini)
}

/// Indices of the non-dominated evaluations.
pub fn pareto_front(evals: &[GridEvaluation]) -> Vec<usize> {
    (0..evals.len())
        .filter(|&i| !evals.iter().any(|other| dominates(other, &evals[i])))
        .collect()
}

/// Picks the front member with the highest mean silhouette, breaking ties by
/// lower Gini and then by grid order.
pub fn choose_from_front(evals: &[GridEvaluation], front: &[usize]) -> Option<usize> {
    front.iter().copied().reduce(|best, i| {
        let (b, c) = (&evals[best], &evals[i]);
        if c.mean_silhouette > b.mean_silhouette
            || (c.mean_silhouette == b.mean_silhouette && c.gini < b.gini)
        {
            i
        } else {
            best
        }
    })
}

/// Evaluates every grid point (in parallel, merged in grid order) and keeps
/// the selected one.
pub fn select_hyperparams(
    dm: &DistanceMatrix,
    grid: &HyperParamGrid,
    seed: u64,
) -> Result<Selection, ClusteringError> {
    let points = grid.points(dm)?;
    if dm.len() <= 1 {
        let params = points[0];
        let chosen = GridEvaluation {
            params,
            mean_silhouette: 0.0,
            gini: 0.0,
            num_clusters: dm.len(),
            degenerate: true,
        };
        return Ok(Selection {
            params,
            labels: ClusterLabels::single(dm.len()),
            chosen: chosen.clone(),
            evaluations: vec![chosen],
            front: vec![0],
        });
    }
    let results: Vec<(GridEvaluation, ClusterLabels)> = points
        .par_iter()
        .map(|&params| {
            let labels = run_clustering(dm, params, seed)?;
            let sil = silhouette(dm, &labels);
            let g = gini(&sil.scores)?;
            Ok((
                GridEvaluation {
                    params,
                    mean_silhouette: sil.mean,
                    gini: g,
                    num_clusters: labels.num_clusters(),
                    degenerate: labels.num_clusters() <= 1,
                },
                labels,
            ))
        })
        .collect::<Result<_, ClusteringError>>()?;
    let (evaluations, mut labelings): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let front = pareto_front(&evaluations);
    let idx = choose_from_front(&evaluations, &front).expect("front of a non-empty grid");
    Ok(Selection {
        params: evaluations[idx].params,
        labels: labelings.swap_remove(idx),
        chosen: evaluations[idx].clone(),
        evaluations,
        front,
    })
}
