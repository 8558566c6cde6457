//! End-to-end runs, solution assembly, VDR and benchmarks.

mod bench;
mod config;
pub mod synthetic;

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::baselines::{exhaustive_optimal, BaselineError};
use crate::blocks::{build_blocks, BlocksError, CoverageMap};
use crate::dataset::{load_dataset, Dataset, DatasetError, Vulnerability};
use crate::ids::{total_cost, CostMap, InputId};
use crate::reduction::{reduce_problem, ReductionError, ReductionResult};
use crate::search::{minimize_components, MoccoResult, SearchError};

pub use bench::{bench, bench_instance, Algorithm, BenchInstance, BenchReport, BenchRow, PairEffect};
pub use config::{GridRanges, RunConfig};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Blocks(#[from] BlocksError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
    #[error("expected {expected} component results, got {got}")]
    MissingComponent { expected: usize, got: usize },
    #[error("{0}")]
    Unsupported(String),
    #[error("cannot write {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl HarnessError {
    /// 2 for invalid input, 3 when the blocks cannot be covered, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Dataset(DatasetError::Io(_)) => 1,
            HarnessError::Dataset(_) | HarnessError::Config(_) => 2,
            HarnessError::Blocks(BlocksError::Dataset(DatasetError::Io(_))) => 1,
            HarnessError::Blocks(
                BlocksError::Parse(_) | BlocksError::Invalid(_) | BlocksError::EmptyDataset | BlocksError::Dataset(_),
            ) => 2,
            HarnessError::Reduction(ReductionError::Parse(_) | ReductionError::Invalid(_)) => 2,
            HarnessError::Search(SearchError::UncoverableObjective(_)) => 3,
            HarnessError::Search(SearchError::PopulationTooSmall(_)) => 2,
            HarnessError::Baseline(BaselineError::NotCoverable(_)) => 3,
            HarnessError::Baseline(BaselineError::SampleTooLarge { .. } | BaselineError::TooLarge(_)) => 2,
            HarnessError::Unsupported(_) => 2,
            _ => 1,
        }
    }
}

/// `I_necessary ∪ ⋃ I_C`, one minimized set per component.
pub fn assemble_solution(
    reduction: &ReductionResult,
    minimized: &[BTreeSet<InputId>],
) -> Result<BTreeSet<InputId>, HarnessError> {
    if minimized.len() != reduction.components.len() {
        return Err(HarnessError::MissingComponent { expected: reduction.components.len(), got: minimized.len() });
    }
    let mut out = reduction.necessary.clone();
    for set in minimized {
        out.extend(set);
    }
    Ok(out)
}

/// Fraction of vulnerabilities with at least one detecting group fully
/// selected. An empty list counts as fully detected.
pub fn vdr(selected: &BTreeSet<InputId>, vulnerabilities: &[Vulnerability]) -> f64 {
    if vulnerabilities.is_empty() {
        log::warn!("no vulnerabilities given; VDR defined as 1.0");
        return 1.0;
    }
    let detected = vulnerabilities
        .iter()
        .filter(|v| v.detecting_groups.iter().any(|g| g.is_subset(selected)))
        .count();
    detected as f64 / vulnerabilities.len() as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentReport {
    pub inputs: usize,
    pub objectives: usize,
    pub selected: Vec<InputId>,
    pub cost: u64,
    pub generations: usize,
    pub misers: usize,
}

/// Everything about a run that depends only on (dataset, config, seed).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub config: String,
    pub seed: u64,
    pub num_inputs: usize,
    pub num_blocks: usize,
    pub initial_cost: u64,
    pub selected: Vec<InputId>,
    pub total_cost: u64,
    pub covers_all: bool,
    pub necessary: Vec<InputId>,
    pub reduction_iterations: usize,
    pub components: Vec<ComponentReport>,
    pub vdr: Option<f64>,
}

impl RunResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serialization cannot fail")
    }
}

/// Wall-clock milliseconds per stage. Kept apart from [`RunResult`] so the
/// result file stays reproducible.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub clustering_ms: f64,
    pub reduction_ms: f64,
    pub search_ms: f64,
    pub total_ms: f64,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub result: RunResult,
    pub timings: Timings,
    pub coverage: CoverageMap,
    pub reduction: ReductionResult,
    pub selected: BTreeSet<InputId>,
}

fn ms(since: Instant) -> f64 {
    since.elapsed().as_secs_f64() * 1e3
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    std::fs::write(path, contents).map_err(|source| HarnessError::Io { path: path.display().to_string(), source })
}

impl PipelineRun {
    /// Writes `coverage.json`, `reduction.json`, `result.json` and
    /// `timings.json` into `dir`.
    pub fn write_artifacts(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir)
            .map_err(|source| HarnessError::Io { path: dir.display().to_string(), source })?;
        write_file(&dir.join("coverage.json"), &self.coverage.to_json())?;
        write_file(&dir.join("reduction.json"), &self.reduction.to_json(&self.coverage))?;
        write_file(&dir.join("result.json"), &self.result.to_json())?;
        let timings = serde_json::to_string_pretty(&self.timings).expect("timings serialize");
        write_file(&dir.join("timings.json"), &timings)
    }
}

/// Reduction followed by MOCCO on every component.
pub fn minimize(
    ids: &BTreeSet<InputId>,
    cm: &CoverageMap,
    costs: &CostMap,
    cfg: &RunConfig,
    seed: u64,
) -> Result<(ReductionResult, Vec<MoccoResult>), HarnessError> {
    let reduction = reduce_problem(ids, cm, costs, cfg.reduction_params());
    let results = minimize_components(&reduction.components, cm, costs, &cfg.mocco_params(seed), cfg.gain_threshold)?;
    Ok((reduction, results))
}

/// Clustering, reduction, search and assembly on an already loaded dataset.
pub fn run_pipeline(dataset: &Dataset, cfg: &RunConfig, seed: u64) -> Result<PipelineRun, HarnessError> {
    cfg.validate()?;
    let start = Instant::now();
    let blocks = build_blocks(dataset, &cfg.blocks_config()?, seed)?;
    let clustering_ms = ms(start);
    let cm = blocks.coverage;
    let ids = dataset.ids();
    let costs = dataset.costs();

    let t = Instant::now();
    let reduction = reduce_problem(&ids, &cm, &costs, cfg.reduction_params());
    let reduction_ms = ms(t);

    let t = Instant::now();
    let results = minimize_components(&reduction.components, &cm, &costs, &cfg.mocco_params(seed), cfg.gain_threshold)?;
    let search_ms = ms(t);

    let minimized: Vec<BTreeSet<InputId>> = results.iter().map(|r| r.members.clone()).collect();
    let selected = assemble_solution(&reduction, &minimized)?;
    let covers_all = cm.cover_of(&selected) == cm.cover_of(&ids);
    let components = reduction
        .components
        .iter()
        .zip(&results)
        .map(|(c, r)| ComponentReport {
            inputs: c.inputs.len(),
            objectives: c.objectives.len(),
            selected: r.members.iter().copied().collect(),
            cost: r.cost,
            generations: r.generations,
            misers: r.num_misers,
        })
        .collect();
    let result = RunResult {
        config: cfg.label(),
        seed,
        num_inputs: ids.len(),
        num_blocks: cm.num_blocks(),
        initial_cost: total_cost(&costs, &ids),
        selected: selected.iter().copied().collect(),
        total_cost: total_cost(&costs, &selected),
        covers_all,
        necessary: reduction.necessary.iter().copied().collect(),
        reduction_iterations: reduction.iterations,
        components,
        vdr: dataset.vulnerabilities.as_deref().map(|v| vdr(&selected, v)),
    };
    let timings = Timings { clustering_ms, reduction_ms, search_ms, total_ms: ms(start) };
    log::info!(
        "{}: {} of {} inputs selected, cost {} of {}",
        result.config,
        selected.len(),
        ids.len(),
        result.total_cost,
        result.initial_cost
    );
    Ok(PipelineRun { result, timings, coverage: cm, reduction, selected })
}

/// [`run_pipeline`] on a dataset file.
pub fn run_pipeline_path(path: impl AsRef<Path>, cfg: &RunConfig, seed: u64) -> Result<PipelineRun, HarnessError> {
    run_pipeline(&load_dataset(path)?, cfg, seed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleResult {
    pub selected: Vec<InputId>,
    pub total_cost: u64,
    pub necessary_cost: u64,
    pub component_costs: Vec<u64>,
}

/// Exact optimum of a reduced problem: necessary inputs plus the
/// exhaustive optimum of every component.
pub fn oracle(reduction: &ReductionResult, cm: &CoverageMap, costs: &CostMap) -> Result<OracleResult, HarnessError> {
    let mut parts = Vec::with_capacity(reduction.components.len());
    for c in &reduction.components {
        parts.push(exhaustive_optimal(c, cm, costs)?);
    }
    let minimized: Vec<BTreeSet<InputId>> = parts.iter().map(|p| p.selected.clone()).collect();
    let selected = assemble_solution(reduction, &minimized)?;
    Ok(OracleResult {
        total_cost: total_cost(costs, &selected),
        selected: selected.into_iter().collect(),
        necessary_cost: total_cost(costs, &reduction.necessary),
        component_costs: parts.iter().map(|p| p.total_cost).collect(),
    })
}
