//! Output classes, action sets and action subclasses.
//!
//! Page texts are clustered into output classes. Every output class yields
//! an action set (the actions that produced one of its pages), which is split
//! by HTTP method and clustered again. The resulting action subclasses are
//! the input blocks an input covers.

mod coverage;

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::clustering::{
    select_hyperparams, ClusterLabels, ClusteringError, DistanceMatrix, GridEvaluation,
    HyperParamGrid,
};
use crate::dataset::{build_shared_filter, Action, Dataset, DatasetError, Stopwords, TextPipeline, TokenDoc};
use crate::distance::{action_distance, output_distance, OutputMetric};
use crate::ids::{InputId, Method};

pub use coverage::{BlockId, CoverageMap, OutputClassId};

#[derive(Debug, Error)]
pub enum BlocksError {
    #[error("dataset has no inputs")]
    EmptyDataset,
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
    #[error("malformed coverage file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid coverage: {0}")]
    Invalid(String),
}

/// Position of one action (and its page) inside an input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Occurrence {
    pub input: InputId,
    pub position: usize,
}

/// Settings of both clustering steps.
#[derive(Debug, Clone)]
pub struct BlocksConfig {
    pub output_metric: OutputMetric,
    pub output_grid: HyperParamGrid,
    pub action_grid: HyperParamGrid,
    pub shared_token_threshold: f64,
    pub stopwords: Stopwords,
}

impl Default for BlocksConfig {
    fn default() -> Self {
        BlocksConfig {
            output_metric: OutputMetric::Lev,
            output_grid: HyperParamGrid::default(),
            action_grid: HyperParamGrid::default(),
            shared_token_threshold: 0.8,
            stopwords: Stopwords::default(),
        }
    }
}

/// Output class of every (input, position).
#[derive(Debug, Clone)]
pub struct OutputClasses {
    pub class_of: BTreeMap<Occurrence, OutputClassId>,
    pub num_classes: usize,
    pub selection: GridEvaluation,
}

/// Preprocesses every page of the dataset, in (input, position) order.
pub fn preprocess_dataset(
    dataset: &Dataset,
    config: &BlocksConfig,
) -> Result<Vec<(Occurrence, TokenDoc)>, BlocksError> {
    let filter = build_shared_filter(dataset.all_outputs(), config.shared_token_threshold)?;
    let pipeline = TextPipeline::new(filter, config.stopwords.clone());
    Ok(occurrences(dataset)
        .map(|(occ, _, page)| (occ, pipeline.process(page)))
        .collect())
}

fn occurrences(dataset: &Dataset) -> impl Iterator<Item = (Occurrence, &Action, &str)> + '_ {
    dataset.inputs.iter().flat_map(|input| {
        input.actions.iter().zip(&input.outputs).enumerate().map(move |(position, (a, o))| {
            (Occurrence { input: input.id, position }, a, o.as_str())
        })
    })
}

/// One clustering over all page texts.
pub fn cluster_outputs(
    dataset: &Dataset,
    config: &BlocksConfig,
    seed: u64,
) -> Result<OutputClasses, BlocksError> {
    if dataset.inputs.is_empty() {
        return Err(BlocksError::EmptyDataset);
    }
    let docs = preprocess_dataset(dataset, config)?;
    cluster_docs(&docs, config, seed)
}

/// Clusters already preprocessed documents.
pub fn cluster_docs(
    docs: &[(Occurrence, TokenDoc)],
    config: &BlocksConfig,
    seed: u64,
) -> Result<OutputClasses, BlocksError> {
    if docs.is_empty() {
        return Err(BlocksError::EmptyDataset);
    }
    let metric = config.output_metric;
    let dm = DistanceMatrix::from_fn(docs.len(), |i, j| {
        output_distance(&docs[i].1, &docs[j].1, metric) as f64
    });
    let selection = select_hyperparams(&dm, &config.output_grid, seed)?;
    let class_of = docs
        .iter()
        .enumerate()
        .map(|(i, (occ, _))| (*occ, selection.labels.get(i)))
        .collect();
    Ok(OutputClasses { class_of, num_classes: selection.labels.num_clusters(), selection: selection.chosen })
}

/// One action occurrence with its action.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionOccurrence {
    pub occurrence: Occurrence,
    pub action: Action,
}

/// `ActionSet(outCl)` for every output class that has at least one page.
/// Occurrences are listed in (input, position) order.
pub fn build_action_sets(
    dataset: &Dataset,
    classes: &OutputClasses,
) -> BTreeMap<OutputClassId, Vec<ActionOccurrence>> {
    let mut sets: BTreeMap<OutputClassId, Vec<ActionOccurrence>> = BTreeMap::new();
    for (occ, action, _) in occurrences(dataset) {
        let class = classes.class_of[&occ];
        sets.entry(class).or_default().push(ActionOccurrence { occurrence: occ, action: action.clone() });
    }
    sets
}

/// Splits an action set into its GET and POST parts.
pub fn partition_by_method(set: &[ActionOccurrence]) -> (Vec<ActionOccurrence>, Vec<ActionOccurrence>) {
    set.iter().cloned().partition(|a| a.action.method == Method::Get)
}

/// Action subclasses of one non-empty part.
pub fn cluster_actions(
    part: &[ActionOccurrence],
    grid: &HyperParamGrid,
    seed: u64,
) -> Result<ClusterLabels, BlocksError> {
    if part.len() <= 1 {
        return Ok(ClusterLabels::single(part.len()));
    }
    let dm = DistanceMatrix::from_fn(part.len(), |i, j| {
        action_distance(&part[i].action, &part[j].action).value
    });
    Ok(select_hyperparams(&dm, grid, seed)?.labels)
}

/// Collects `Cover(in)` from the block of every occurrence.
pub fn build_coverage(block_of: &BTreeMap<Occurrence, BlockId>) -> Result<CoverageMap, BlocksError> {
    let mut cover: BTreeMap<InputId, BTreeSet<BlockId>> = BTreeMap::new();
    for (occ, bl) in block_of {
        cover.entry(occ.input).or_default().insert(*bl);
    }
    CoverageMap::from_cover(cover)
}

/// Everything the double clustering produced.
#[derive(Debug, Clone)]
pub struct BlocksOutput {
    pub coverage: CoverageMap,
    pub output_classes: OutputClasses,
    pub block_of: BTreeMap<Occurrence, BlockId>,
}

/// Runs both clustering steps. Parts are clustered in parallel, each with
/// its own seed derived from its position in (class, method) order.
pub fn build_blocks(dataset: &Dataset, config: &BlocksConfig, seed: u64) -> Result<BlocksOutput, BlocksError> {
    let classes = cluster_outputs(dataset, config, seed)?;
    let sets = build_action_sets(dataset, &classes);
    let parts: Vec<(OutputClassId, Method, Vec<ActionOccurrence>)> = sets
        .into_iter()
        .flat_map(|(class, set)| {
            let (get, post) = partition_by_method(&set);
            [(class, Method::Get, get), (class, Method::Post, post)]
        })
        .filter(|(_, _, part)| !part.is_empty())
        .collect();
    let labelings: Vec<ClusterLabels> = parts
        .par_iter()
        .enumerate()
        .map(|(i, (_, _, part))| {
            cluster_actions(part, &config.action_grid, seed.wrapping_add(1 + i as u64))
        })
        .collect::<Result<_, _>>()?;
    let mut block_of = BTreeMap::new();
    for ((class, method, part), labels) in parts.iter().zip(&labelings) {
        for (i, a) in part.iter().enumerate() {
            block_of.insert(a.occurrence, BlockId::new(*class, *method, labels.get(i)));
        }
    }
    let coverage = build_coverage(&block_of)?;
    Ok(BlocksOutput { coverage, output_classes: classes, block_of })
}
