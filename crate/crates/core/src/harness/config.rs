use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::blocks::BlocksConfig;
use crate::clustering::{ClusterAlgo, HyperParamGrid};
use crate::dataset::Stopwords;
use crate::distance::OutputMetric;
use crate::reduction::{ReductionParams, DEFAULT_GAIN_THRESHOLD, DEFAULT_NEIGHBOR_CAP};
use crate::search::MoccoParams;

/// Ranges shared by both clustering steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridRanges {
    pub k_range: (usize, usize),
    pub eps_range: (f64, f64),
    pub eps_step: Option<f64>,
    pub min_neighbors_range: (usize, usize),
}

impl Default for GridRanges {
    fn default() -> Self {
        let g = HyperParamGrid::default();
        GridRanges {
            k_range: g.k_range,
            eps_range: g.eps_range,
            eps_step: g.eps_step,
            min_neighbors_range: g.min_neighbors_range,
        }
    }
}

impl GridRanges {
    pub fn for_algo(&self, algo: ClusterAlgo) -> HyperParamGrid {
        HyperParamGrid {
            algo,
            k_range: self.k_range,
            eps_range: self.eps_range,
            eps_step: self.eps_step,
            min_neighbors_range: self.min_neighbors_range,
        }
    }
}

/// Every knob of a run. Missing keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub output_metric: OutputMetric,
    pub output_algo: ClusterAlgo,
    pub action_algo: ClusterAlgo,
    pub grid: GridRanges,
    pub n_size: usize,
    pub generations: usize,
    pub time_budget_ms: Option<u64>,
    pub repetitions: usize,
    pub seed: u64,
    pub shared_token_threshold: f64,
    pub stopwords_file: Option<PathBuf>,
    pub gain_threshold: usize,
    pub dominance_neighbor_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            output_metric: OutputMetric::Lev,
            output_algo: ClusterAlgo::Dbscan,
            action_algo: ClusterAlgo::Dbscan,
            grid: GridRanges::default(),
            n_size: 20,
            generations: 100,
            time_budget_ms: None,
            repetitions: 1,
            seed: 0,
            shared_token_threshold: 0.8,
            stopwords_file: None,
            gain_threshold: DEFAULT_GAIN_THRESHOLD,
            dominance_neighbor_cap: DEFAULT_NEIGHBOR_CAP,
        }
    }
}

fn letter(algo: ClusterAlgo) -> char {
    match algo {
        ClusterAlgo::Kmeans => 'K',
        ClusterAlgo::Dbscan => 'D',
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, HarnessError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.n_size < 2 {
            return bad(format!("n_size must be at least 2, got {}", self.n_size));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be positive".into());
        }
        if !(self.shared_token_threshold > 0.0 && self.shared_token_threshold <= 1.0) {
            return bad(format!("shared_token_threshold must lie in (0, 1], got {}", self.shared_token_threshold));
        }
        let (klo, khi) = self.grid.k_range;
        if klo == 0 || klo > khi {
            return bad(format!("invalid k_range {klo}..={khi}"));
        }
        let (elo, ehi) = self.grid.eps_range;
        if !(elo > 0.0 && ehi >= elo) || self.grid.eps_step.is_some_and(|s| s.is_nan() || s <= 0.0) {
            return bad(format!("invalid eps_range {elo}..={ehi}"));
        }
        let (mlo, mhi) = self.grid.min_neighbors_range;
        if mlo == 0 || mlo > mhi {
            return bad(format!("invalid min_neighbors_range {mlo}..={mhi}"));
        }
        Ok(())
    }

    /// Three letters: distance (L/B), output clustering (K/D), action
    /// clustering (K/D).
    pub fn label(&self) -> String {
        let m = match self.output_metric {
            OutputMetric::Lev => 'L',
            OutputMetric::Bag => 'B',
        };
        [m, letter(self.output_algo), letter(self.action_algo)].iter().collect()
    }

    pub fn blocks_config(&self) -> Result<BlocksConfig, HarnessError> {
        let stopwords = match &self.stopwords_file {
            Some(p) => Stopwords::from_file(p)
                .map_err(|e| HarnessError::Config(format!("{}: {e}", p.display())))?,
            None => Stopwords::default(),
        };
        Ok(BlocksConfig {
            output_metric: self.output_metric,
            output_grid: self.grid.for_algo(self.output_algo),
            action_grid: self.grid.for_algo(self.action_algo),
            shared_token_threshold: self.shared_token_threshold,
            stopwords,
        })
    }

    pub fn reduction_params(&self) -> ReductionParams {
        ReductionParams { neighbor_cap: self.dominance_neighbor_cap }
    }

    pub fn mocco_params(&self, seed: u64) -> MoccoParams {
        MoccoParams {
            n_size: self.n_size,
            generations: self.generations,
            time_budget_ms: self.time_budget_ms,
            seed,
        }
    }
}
