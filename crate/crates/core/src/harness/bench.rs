use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{vdr, write_file, HarnessError, RunConfig};
use crate::baselines::{a12_effect_size, art_select, exhaustive_optimal, greedy_cover, random_cover};
use crate::blocks::{build_blocks, CoverageMap};
use crate::clustering::HyperParamGrid;
use crate::dataset::Dataset;
use crate::ids::{total_cost, CostMap, InputId};
use crate::reduction::{reduce_problem, Component, ReductionParams, ReductionResult};
use crate::search::{minimize_components, MoccoParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Mocco,
    Greedy,
    Random,
    Art,
    Exhaustive,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] =
        [Algorithm::Mocco, Algorithm::Greedy, Algorithm::Random, Algorithm::Art, Algorithm::Exhaustive];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Mocco => "mocco",
            Algorithm::Greedy => "greedy",
            Algorithm::Random => "random",
            Algorithm::Art => "art",
            Algorithm::Exhaustive => "exhaustive",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| HarnessError::Config(format!("unknown algorithm {s:?}")))
    }
}

/// A reduced problem every algorithm of a repetition works on.
#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub label: String,
    pub coverage: CoverageMap,
    pub costs: CostMap,
    pub reduction: ReductionResult,
    /// Needed by ART and for VDR.
    pub dataset: Option<Dataset>,
    pub action_grid: HyperParamGrid,
}

impl BenchInstance {
    /// Runs the reduction on every input of `coverage`.
    pub fn reduced(label: &str, coverage: CoverageMap, costs: CostMap, params: ReductionParams) -> Self {
        let ids: BTreeSet<InputId> = coverage.inputs().collect();
        let reduction = reduce_problem(&ids, &coverage, &costs, params);
        BenchInstance {
            label: label.to_string(),
            coverage,
            costs,
            reduction,
            dataset: None,
            action_grid: HyperParamGrid::default(),
        }
    }

    /// Skips the reduction: the whole instance is a single component.
    pub fn unreduced(label: &str, coverage: CoverageMap, costs: CostMap) -> Self {
        let inputs: BTreeSet<InputId> = coverage.inputs().collect();
        let objectives = coverage.all_blocks();
        let reduction = ReductionResult {
            necessary: BTreeSet::new(),
            components: vec![Component { inputs, objectives }],
            iterations: 0,
            capped: BTreeSet::new(),
        };
        BenchInstance {
            label: label.to_string(),
            coverage,
            costs,
            reduction,
            dataset: None,
            action_grid: HyperParamGrid::default(),
        }
    }

    fn search_inputs(&self) -> BTreeSet<InputId> {
        self.reduction.components.iter().flat_map(|c| c.inputs.iter().copied()).collect()
    }

    fn objectives(&self) -> BTreeSet<crate::BlockId> {
        self.reduction.components.iter().flat_map(|c| c.objectives.iter().copied()).collect()
    }

    /// Selected ids of one algorithm, necessary inputs included.
    pub fn run(&self, algo: Algorithm, cfg: &RunConfig, seed: u64) -> Result<BTreeSet<InputId>, HarnessError> {
        let mut selected = self.reduction.necessary.clone();
        let (cm, costs) = (&self.coverage, &self.costs);
        match algo {
            Algorithm::Mocco => {
                let params = MoccoParams { seed, ..cfg.mocco_params(seed) };
                for r in minimize_components(&self.reduction.components, cm, costs, &params, cfg.gain_threshold)? {
                    selected.extend(r.members);
                }
            }
            Algorithm::Greedy => {
                selected.extend(greedy_cover(&self.objectives(), &self.search_inputs(), cm, costs)?.selected);
            }
            Algorithm::Random => {
                selected.extend(random_cover(&self.objectives(), &self.search_inputs(), cm, costs, seed)?.selected);
            }
            Algorithm::Exhaustive => {
                for c in &self.reduction.components {
                    selected.extend(exhaustive_optimal(c, cm, costs)?.selected);
                }
            }
            Algorithm::Art => {
                let dataset = self
                    .dataset
                    .as_ref()
                    .ok_or_else(|| HarnessError::Unsupported("ART needs the dataset".into()))?;
                // works on the initial input set, not the reduced one
                return Ok(art_select(dataset, &self.action_grid, seed)?.selected);
            }
        }
        Ok(selected)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub config: String,
    pub repetition: usize,
    pub seed: u64,
    pub size: usize,
    pub cost: u64,
    pub covers_all: bool,
    pub runtime_ms: f64,
    pub vdr: Option<f64>,
}

/// `A12(a, b)` on cost: probability that `a` costs more than `b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairEffect {
    pub a: Algorithm,
    pub b: Algorithm,
    pub a12: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchReport {
    pub algorithms: Vec<Algorithm>,
    pub repetitions: usize,
    pub seed: u64,
    pub rows: Vec<BenchRow>,
    pub a12: Vec<PairEffect>,
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }

    /// Rows only.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row).expect("rows serialize to csv");
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("csv is utf-8")
    }

    /// Same report with runtimes zeroed, for reproducibility checks.
    pub fn without_runtimes(&self) -> Self {
        let mut out = self.clone();
        for r in &mut out.rows {
            r.runtime_ms = 0.0;
        }
        out
    }

    pub fn write(&self, json: &Path, csv: &Path) -> Result<(), HarnessError> {
        write_file(json, &self.to_json())?;
        write_file(csv, &self.to_csv())
    }
}

/// Seed of repetition `r`.
pub fn repetition_seed(seed: u64, r: usize) -> u64 {
    seed.wrapping_add((r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

fn run_repetition(
    instance: &BenchInstance,
    algorithms: &[Algorithm],
    cfg: &RunConfig,
    r: usize,
    seed: u64,
) -> Result<Vec<BenchRow>, HarnessError> {
    let all: BTreeSet<InputId> = instance.coverage.inputs().collect();
    let universe = instance.coverage.cover_of(&all);
    let vulns = instance.dataset.as_ref().and_then(|d| d.vulnerabilities.as_deref());
    let mut rows = Vec::with_capacity(algorithms.len());
    for &algo in algorithms {
        let t = Instant::now();
        let selected = instance.run(algo, cfg, seed)?;
        let runtime_ms = t.elapsed().as_secs_f64() * 1e3;
        rows.push(BenchRow {
            algorithm: algo,
            config: instance.label.clone(),
            repetition: r,
            seed,
            size: selected.len(),
            cost: total_cost(&instance.costs, &selected),
            covers_all: instance.coverage.cover_of(&selected) == universe,
            runtime_ms,
            vdr: vulns.map(|v| vdr(&selected, v)),
        });
    }
    Ok(rows)
}

fn in_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T, HarnessError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start {jobs} worker(s): {e}")))?;
    Ok(pool.install(f))
}

fn collect_report(
    algorithms: &[Algorithm],
    repetitions: usize,
    seed: u64,
    per_rep: Vec<Vec<BenchRow>>,
) -> Result<BenchReport, HarnessError> {
    // samples by position in `algorithms`, so a repeated algorithm gets its own column
    let samples: Vec<Vec<f64>> = (0..algorithms.len())
        .map(|k| per_rep.iter().map(|rows| rows[k].cost as f64).collect())
        .collect();
    let mut a12 = Vec::new();
    for i in 0..algorithms.len() {
        for j in 0..algorithms.len() {
            if i != j {
                a12.push(PairEffect {
                    a: algorithms[i],
                    b: algorithms[j],
                    a12: a12_effect_size(&samples[i], &samples[j])?,
                });
            }
        }
    }
    Ok(BenchReport {
        algorithms: algorithms.to_vec(),
        repetitions,
        seed,
        rows: per_rep.into_iter().flatten().collect(),
        a12,
    })
}

fn check(algorithms: &[Algorithm], repetitions: usize) -> Result<(), HarnessError> {
    if algorithms.is_empty() {
        return Err(HarnessError::Config("no algorithm selected".into()));
    }
    if repetitions == 0 {
        return Err(HarnessError::Config("repetitions must be positive".into()));
    }
    Ok(())
}

/// Runs every algorithm `repetitions` times on a fixed instance.
pub fn bench_instance(
    instance: &BenchInstance,
    cfg: &RunConfig,
    algorithms: &[Algorithm],
    repetitions: usize,
    seed: u64,
    jobs: usize,
) -> Result<BenchReport, HarnessError> {
    check(algorithms, repetitions)?;
    let one = |r: usize| run_repetition(instance, algorithms, cfg, r, repetition_seed(seed, r));
    let per_rep: Vec<Vec<BenchRow>> = if jobs > 1 {
        in_pool(jobs, || (0..repetitions).into_par_iter().map(one).collect::<Result<_, _>>())??
    } else {
        (0..repetitions).map(one).collect::<Result<_, _>>()?
    };
    collect_report(algorithms, repetitions, seed, per_rep)
}

/// Per repetition: derive a seed, build blocks and reduce once, then run
/// every algorithm on that reduced instance.
pub fn bench(
    dataset: &Dataset,
    cfg: &RunConfig,
    algorithms: &[Algorithm],
    repetitions: usize,
    seed: u64,
    jobs: usize,
) -> Result<BenchReport, HarnessError> {
    check(algorithms, repetitions)?;
    cfg.validate()?;
    let blocks_cfg = cfg.blocks_config()?;
    let one = |r: usize| -> Result<Vec<BenchRow>, HarnessError> {
        let seed_r = repetition_seed(seed, r);
        let blocks = build_blocks(dataset, &blocks_cfg, seed_r)?;
        let mut instance =
            BenchInstance::reduced(&cfg.label(), blocks.coverage, dataset.costs(), cfg.reduction_params());
        instance.dataset = Some(dataset.clone());
        instance.action_grid = blocks_cfg.action_grid.clone();
        run_repetition(&instance, algorithms, cfg, r, seed_r)
    };
    let per_rep: Vec<Vec<BenchRow>> = if jobs > 1 {
        in_pool(jobs, || (0..repetitions).into_par_iter().map(one).collect::<Result<_, _>>())??
    } else {
        (0..repetitions).map(one).collect::<Result<_, _>>()?
    };
    collect_report(algorithms, repetitions, seed, per_rep)
}
