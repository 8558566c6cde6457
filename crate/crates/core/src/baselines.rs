//! Comparison algorithms and the A12 effect size.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::{IteratorRandom, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::blocks::{cluster_actions, partition_by_method, ActionOccurrence, BlockId, BlocksError, CoverageMap, Occurrence};
use crate::clustering::HyperParamGrid;
use crate::dataset::Dataset;
use crate::ids::{total_cost, CostMap, InputId};
use crate::reduction::{Component, SetSystem};

/// Largest component the exhaustive oracle accepts.
pub const EXHAUSTIVE_LIMIT: usize = 20;

#[derive(Debug, Error)]
pub enum BaselineError {
    #[error("the candidates cannot cover {0} block(s)")]
    NotCoverable(usize),
    #[error("cannot sample {n} of {available} candidates")]
    SampleTooLarge { n: usize, available: usize },
    #[error("component has {0} inputs, more than the exhaustive limit of {EXHAUSTIVE_LIMIT}")]
    TooLarge(usize),
    #[error("A12 needs two non-empty samples")]
    EmptySample,
    #[error(transparent)]
    Blocks(#[from] BlocksError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SelectionResult {
    pub selected: BTreeSet<InputId>,
    pub total_cost: u64,
    pub covers_all: bool,
    pub algorithm: String,
    pub seed: u64,
}

impl SelectionResult {
    fn new(
        selected: BTreeSet<InputId>,
        costs: &CostMap,
        covers_all: bool,
        algorithm: &str,
        seed: u64,
    ) -> Self {
        let total_cost = total_cost(costs, &selected);
        SelectionResult { selected, total_cost, covers_all, algorithm: algorithm.to_string(), seed }
    }
}

fn covers(universe: &BTreeSet<BlockId>, selected: &BTreeSet<InputId>, cm: &CoverageMap) -> bool {
    let covered = cm.cover_of(selected);
    universe.iter().all(|b| covered.contains(b))
}

/// Weighted greedy set cover: repeatedly picks the input with the most newly
/// covered blocks per unit of cost, breaking ties by lower cost then lower id.
pub fn greedy_cover(
    universe: &BTreeSet<BlockId>,
    candidates: &BTreeSet<InputId>,
    cm: &CoverageMap,
    costs: &CostMap,
) -> Result<SelectionResult, BaselineError> {
    let reachable = cm.cover_of(candidates);
    let missing = universe.iter().filter(|b| !reachable.contains(b)).count();
    if missing > 0 {
        return Err(BaselineError::NotCoverable(missing));
    }
    let mut uncovered = universe.clone();
    let mut selected = BTreeSet::new();
    while !uncovered.is_empty() {
        let mut best: Option<(InputId, u64, u64)> = None;
        for &c in candidates.iter().filter(|c| !selected.contains(*c)) {
            let gain = cm.cover(c).intersection(&uncovered).count() as u64;
            if gain == 0 {
                continue;
            }
            let cost = costs.get(&c).copied().unwrap_or(0);
            let better = match best {
                None => true,
                // gain/cost > g/k  ⇔  gain·k > g·cost
                Some((_, g, k)) => {
                    let lhs = gain as u128 * k as u128;
                    let rhs = g as u128 * cost as u128;
                    lhs > rhs || (lhs == rhs && cost < k)
                }
            };
            if better {
                best = Some((c, gain, cost));
            }
        }
        let (pick, _, _) = best.expect("coverable universe always has a useful candidate");
        for b in cm.cover(pick) {
            uncovered.remove(b);
        }
        selected.insert(pick);
    }
    Ok(SelectionResult::new(selected, costs, true, "greedy", 0))
}

/// `n` candidates sampled uniformly without replacement.
pub fn random_select(
    candidates: &BTreeSet<InputId>,
    n: usize,
    costs: &CostMap,
    seed: u64,
) -> Result<SelectionResult, BaselineError> {
    if n > candidates.len() {
        return Err(BaselineError::SampleTooLarge { n, available: candidates.len() });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let selected: BTreeSet<InputId> = candidates.iter().copied().choose_multiple(&mut rng, n).into_iter().collect();
    Ok(SelectionResult::new(selected, costs, false, "random", seed))
}

/// Adds uniformly drawn candidates until `universe` is covered.
pub fn random_cover(
    universe: &BTreeSet<BlockId>,
    candidates: &BTreeSet<InputId>,
    cm: &CoverageMap,
    costs: &CostMap,
    seed: u64,
) -> Result<SelectionResult, BaselineError> {
    let reachable = cm.cover_of(candidates);
    let missing = universe.iter().filter(|b| !reachable.contains(b)).count();
    if missing > 0 {
        return Err(BaselineError::NotCoverable(missing));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<InputId> = candidates.iter().copied().collect();
    order.shuffle(&mut rng);
    let mut uncovered = universe.clone();
    let mut selected = BTreeSet::new();
    for c in order {
        if uncovered.is_empty() {
            break;
        }
        for b in cm.cover(c) {
            uncovered.remove(b);
        }
        selected.insert(c);
    }
    let covers_all = covers(universe, &selected, cm);
    Ok(SelectionResult::new(selected, costs, covers_all, "random", seed))
}

/// Clusters all action occurrences of the dataset (split by method, without
/// output classes) and picks one covering input per cluster.
pub fn art_select(dataset: &Dataset, grid: &HyperParamGrid, seed: u64) -> Result<SelectionResult, BaselineError> {
    let all: Vec<ActionOccurrence> = dataset
        .inputs
        .iter()
        .flat_map(|input| {
            input.actions.iter().enumerate().map(move |(position, a)| ActionOccurrence {
                occurrence: Occurrence { input: input.id, position },
                action: a.clone(),
            })
        })
        .collect();
    let (get, post) = partition_by_method(&all);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut selected = BTreeSet::new();
    for (k, part) in [get, post].iter().enumerate() {
        if part.is_empty() {
            continue;
        }
        let labels = cluster_actions(part, grid, seed.wrapping_add(k as u64))?;
        let mut holders: BTreeMap<usize, BTreeSet<InputId>> = BTreeMap::new();
        for (i, a) in part.iter().enumerate() {
            holders.entry(labels.get(i)).or_default().insert(a.occurrence.input);
        }
        for inputs in holders.values() {
            let pick = *inputs.iter().choose(&mut rng).expect("clusters are non-empty");
            selected.insert(pick);
        }
    }
    Ok(SelectionResult::new(selected, &dataset.costs(), false, "art", seed))
}

/// Minimum-cost cover of a component's objectives by branch and bound:
/// branch on the first uncovered objective over its inputs, cheapest first,
/// pruning partial selections that already cost as much as the best.
pub fn exhaustive_optimal(
    component: &Component,
    cm: &CoverageMap,
    costs: &CostMap,
) -> Result<SelectionResult, BaselineError> {
    if component.inputs.len() > EXHAUSTIVE_LIMIT {
        return Err(BaselineError::TooLarge(component.inputs.len()));
    }
    let sys = SetSystem::new(&component.inputs, cm, costs, &component.objectives);
    let uncoverable = component.objectives.len() - sys.num_blocks();
    if uncoverable > 0 {
        return Err(BaselineError::NotCoverable(uncoverable));
    }
    let (_, members) = optimal_cover(&sys).ok_or(BaselineError::NotCoverable(1))?;
    let selected = members.iter().map(|&i| sys.ids[i]).collect();
    Ok(SelectionResult::new(selected, costs, true, "exhaustive", 0))
}

/// Cheapest subset covering every block of `sys`, as input indices.
pub fn optimal_cover(sys: &SetSystem) -> Option<(u64, Vec<usize>)> {
    let mut by_cost: Vec<Vec<usize>> = sys.inputs_of.clone();
    for list in &mut by_cost {
        list.sort_by_key(|&i| (sys.costs[i], i));
    }
    struct Search<'a> {
        sys: &'a SetSystem,
        by_cost: &'a [Vec<usize>],
        counts: Vec<u32>,
        chosen: Vec<usize>,
        best: Option<(u64, Vec<usize>)>,
    }
    impl Search<'_> {
        fn go(&mut self, spent: u64) {
            if self.best.as_ref().is_some_and(|(c, _)| spent >= *c) {
                return;
            }
            let Some(open) = self.counts.iter().position(|&c| c == 0) else {
                self.best = Some((spent, self.chosen.clone()));
                return;
            };
            for k in 0..self.by_cost[open].len() {
                let i = self.by_cost[open][k];
                for &b in &self.sys.cover[i] {
                    self.counts[b] += 1;
                }
                self.chosen.push(i);
                self.go(spent + self.sys.costs[i]);
                self.chosen.pop();
                for &b in &self.sys.cover[i] {
                    self.counts[b] -= 1;
                }
            }
        }
    }
    let mut s = Search { sys, by_cost: &by_cost, counts: vec![0; sys.num_blocks()], chosen: Vec::new(), best: None };
    s.go(0);
    s.best.map(|(c, mut m)| {
        m.sort_unstable();
        (c, m)
    })
}

/// Vargha–Delaney A12: probability that a value of `s1` exceeds one of `s2`,
/// counting ties as one half.
pub fn a12_effect_size(s1: &[f64], s2: &[f64]) -> Result<f64, BaselineError> {
    if s1.is_empty() || s2.is_empty() {
        return Err(BaselineError::EmptySample);
    }
    let mut wins = 0.0;
    for a in s1 {
        for b in s2 {
            if a > b {
                wins += 1.0;
            } else if a == b {
                wins += 0.5;
            }
        }
    }
    Ok(wins / (s1.len() * s2.len()) as f64)
}
