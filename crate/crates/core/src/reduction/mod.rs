//! Problem reduction: necessary inputs, duplicates, local dominance, and the
//! split of what remains into independent components.

mod gain;

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::{BlockId, CoverageMap};
use crate::ids::{total_cost, CostMap, InputId};

pub use gain::{valid_orders_gain, Gain, SetSystem, DEFAULT_GAIN_THRESHOLD};

/// Above this many cheaper neighbors an input is kept without a dominance
/// check.
pub const DEFAULT_NEIGHBOR_CAP: usize = 20;

#[derive(Debug, Error)]
pub enum ReductionError {
    #[error("{redundant} redundant inputs exceed the exhaustive gain threshold of {threshold}")]
    GainThreshold { redundant: usize, threshold: usize },
    #[error("input {0} is not in the set")]
    NotInSet(InputId),
    #[error("malformed reduction file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid reduction file: {0}")]
    Invalid(String),
}

/// Inputs already known to be needed, inputs still to decide, and the blocks
/// they must cover.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SearchState {
    pub necessary: BTreeSet<InputId>,
    pub search: BTreeSet<InputId>,
    pub objectives: BTreeSet<BlockId>,
}

impl SearchState {
    pub fn initial(ids: &BTreeSet<InputId>, cm: &CoverageMap) -> Self {
        SearchState { necessary: BTreeSet::new(), search: ids.clone(), objectives: cm.cover_of(ids) }
    }

    /// `Cover(in) ∩ objectives`.
    pub fn objective_cover(&self, input: InputId, cm: &CoverageMap) -> BTreeSet<BlockId> {
        cm.cover(input).intersection(&self.objectives).copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub inputs: BTreeSet<InputId>,
    pub objectives: BTreeSet<BlockId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionResult {
    pub necessary: BTreeSet<InputId>,
    pub components: Vec<Component>,
    pub iterations: usize,
    /// Inputs kept only because they had too many neighbors to check.
    pub capped: BTreeSet<InputId>,
}

/// `|Inputs(bl) ∩ I|`.
pub fn superposition(bl: &BlockId, inputs: &BTreeSet<InputId>, cm: &CoverageMap) -> usize {
    cm.inputs_of(bl).intersection(inputs).count()
}

/// Minimum superposition over `Cover(in)`, minus one. Zero means necessary.
pub fn redundancy(
    input: InputId,
    inputs: &BTreeSet<InputId>,
    cm: &CoverageMap,
) -> Result<usize, ReductionError> {
    if !inputs.contains(&input) {
        return Err(ReductionError::NotInSet(input));
    }
    Ok(cm
        .cover(input)
        .iter()
        .map(|bl| superposition(bl, inputs, cm))
        .min()
        .map_or(0, |s| s - 1))
}

/// Moves inputs that are the only cover of some objective into the necessary
/// set, drops their blocks from the objectives, then drops search inputs
/// left covering no objective.
pub fn determine_redundancy(state: &SearchState, cm: &CoverageMap) -> SearchState {
    let newly_necessary: BTreeSet<InputId> = state
        .search
        .iter()
        .copied()
        .filter(|&input| {
            state
                .objective_cover(input, cm)
                .iter()
                .any(|bl| superposition(bl, &state.search, cm) == 1)
        })
        .collect();
    let mut next = state.clone();
    for input in &newly_necessary {
        next.search.remove(input);
        next.necessary.insert(*input);
        for bl in cm.cover(*input) {
            next.objectives.remove(bl);
        }
    }
    let objectives = &next.objectives;
    next.search.retain(|&input| cm.cover(input).iter().any(|bl| objectives.contains(bl)));
    next
}

/// Keeps the lowest id among inputs with the same objective cover and cost.
pub fn remove_duplicates(state: &SearchState, cm: &CoverageMap, costs: &CostMap) -> SearchState {
    let mut seen: BTreeSet<(BTreeSet<BlockId>, u64)> = BTreeSet::new();
    let mut next = state.clone();
    // search iterates in increasing id order, so the first one seen is kept
    next.search = state
        .search
        .iter()
        .copied()
        .filter(|&input| seen.insert((state.objective_cover(input, cm), cost_of(costs, input))))
        .collect();
    next
}

fn cost_of(costs: &CostMap, input: InputId) -> u64 {
    costs.get(&input).copied().unwrap_or(0)
}

/// Outcome of a local-dominance check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Dominance {
    /// Dominated by the given subset of neighbors.
    By(BTreeSet<InputId>),
    NotDominated,
    /// Too many candidate neighbors; treated as not dominated.
    Capped,
}

/// Search inputs sharing an objective with `input`.
pub fn neighbors(input: InputId, state: &SearchState, cm: &CoverageMap) -> BTreeSet<InputId> {
    state
        .objective_cover(input, cm)
        .iter()
        .flat_map(|bl| cm.inputs_of(bl).iter().copied())
        .filter(|other| *other != input && state.search.contains(other))
        .collect()
}

/// Looks for a subset `S` of neighbors with `Cover(in) ∩ objectives ⊆
/// Cover(S)` and `cost(S) ≤ cost(in)`.
///
/// Branches on the first block not yet covered, trying cheaper neighbors
/// first and pruning on the cost budget.
pub fn check_local_dominance(
    input: InputId,
    state: &SearchState,
    cm: &CoverageMap,
    costs: &CostMap,
    neighbor_cap: usize,
) -> Dominance {
    let budget = cost_of(costs, input);
    let target: Vec<BlockId> = state.objective_cover(input, cm).into_iter().collect();
    if target.is_empty() {
        return Dominance::NotDominated;
    }
    let mut candidates: Vec<InputId> = neighbors(input, state, cm)
        .into_iter()
        .filter(|n| cost_of(costs, *n) <= budget)
        .collect();
    if candidates.len() > neighbor_cap {
        log::warn!(
            "{input} has {} candidate dominators (cap {neighbor_cap}); keeping it",
            candidates.len()
        );
        return Dominance::Capped;
    }
    candidates.sort_by_key(|n| (cost_of(costs, *n), *n));
    let cand_cover: Vec<Vec<usize>> = candidates
        .iter()
        .map(|n| (0..target.len()).filter(|&t| cm.cover(*n).contains(&target[t])).collect())
        .collect();
    let cand_costs: Vec<u64> = candidates.iter().map(|n| cost_of(costs, *n)).collect();

    fn search(
        covered: &mut Vec<u32>,
        chosen: &mut Vec<usize>,
        spent: u64,
        budget: u64,
        cand_cover: &[Vec<usize>],
        cand_costs: &[u64],
    ) -> bool {
        let Some(open) = covered.iter().position(|&c| c == 0) else {
            return true;
        };
        for k in 0..cand_cover.len() {
            if chosen.contains(&k) || !cand_cover[k].contains(&open) {
                continue;
            }
            // candidates are sorted by cost, so later ones are no cheaper
            if spent + cand_costs[k] > budget {
                break;
            }
            for &t in &cand_cover[k] {
                covered[t] += 1;
            }
            chosen.push(k);
            if search(covered, chosen, spent + cand_costs[k], budget, cand_cover, cand_costs) {
                return true;
            }
            chosen.pop();
            for &t in &cand_cover[k] {
                covered[t] -= 1;
            }
        }
        false
    }

    let mut covered = vec![0u32; target.len()];
    let mut chosen = Vec::new();
    if search(&mut covered, &mut chosen, 0, budget, &cand_cover, &cand_costs) {
        Dominance::By(chosen.into_iter().map(|k| candidates[k]).collect())
    } else {
        Dominance::NotDominated
    }
}

pub fn locally_dominated(input: InputId, state: &SearchState, cm: &CoverageMap, costs: &CostMap) -> bool {
    matches!(
        check_local_dominance(input, state, cm, costs, DEFAULT_NEIGHBOR_CAP),
        Dominance::By(_)
    )
}

/// Removes every input that is dominated in the given state. Assumes
/// duplicates were removed first, as two duplicates dominate each other.
/// Returns the new state and the inputs kept because of the neighbor cap.
pub fn remove_locally_dominated(
    state: &SearchState,
    cm: &CoverageMap,
    costs: &CostMap,
    neighbor_cap: usize,
) -> (SearchState, BTreeSet<InputId>) {
    let verdicts: Vec<(InputId, Dominance)> = state
        .search
        .par_iter()
        .map(|&input| (input, check_local_dominance(input, state, cm, costs, neighbor_cap)))
        .collect();
    let mut next = state.clone();
    let mut capped = BTreeSet::new();
    for (input, verdict) in verdicts {
        match verdict {
            Dominance::By(_) => {
                next.search.remove(&input);
            }
            Dominance::Capped => {
                capped.insert(input);
            }
            Dominance::NotDominated => {}
        }
    }
    (next, capped)
}

/// Connected components of the overlap graph over the search inputs,
/// ordered by their smallest input id.
pub fn split_components(state: &SearchState, cm: &CoverageMap) -> Vec<Component> {
    let mut seen: BTreeSet<InputId> = BTreeSet::new();
    let mut components = Vec::new();
    for &start in &state.search {
        if !seen.insert(start) {
            continue;
        }
        let mut inputs = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(input) = queue.pop_front() {
            for n in neighbors(input, state, cm) {
                if seen.insert(n) {
                    inputs.insert(n);
                    queue.push_back(n);
                }
            }
        }
        let objectives = cm.cover_of(&inputs).intersection(&state.objectives).copied().collect();
        components.push(Component { inputs, objectives });
    }
    components
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionParams {
    pub neighbor_cap: usize,
}

impl Default for ReductionParams {
    fn default() -> Self {
        ReductionParams { neighbor_cap: DEFAULT_NEIGHBOR_CAP }
    }
}

/// Repeats redundancy, duplicate and dominance removal until an iteration
/// removes nothing (or nothing is left), then splits the remaining inputs into components.
pub fn reduce_problem(
    ids: &BTreeSet<InputId>,
    cm: &CoverageMap,
    costs: &CostMap,
    params: ReductionParams,
) -> ReductionResult {
    let mut state = SearchState::initial(ids, cm);
    let mut iterations = 0;
    let mut capped;
    loop {
        iterations += 1;
        let before = state.search.len();
        state = determine_redundancy(&state, cm);
        state = remove_duplicates(&state, cm, costs);
        let (next, kept) = remove_locally_dominated(&state, cm, costs, params.neighbor_cap);
        state = next;
        capped = kept;
        if state.search.len() == before || state.search.is_empty() {
            break;
        }
    }
    capped.retain(|i| state.search.contains(i));
    let components = split_components(&state, cm);
    log::info!(
        "reduction: {} necessary, {} components after {iterations} iteration(s), necessary cost {}",
        state.necessary.len(),
        components.len(),
        total_cost(costs, &state.necessary)
    );
    ReductionResult { necessary: state.necessary, components, iterations, capped }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReductionFile {
    necessary: Vec<InputId>,
    components: Vec<ComponentEntry>,
    iterations: usize,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentEntry {
    inputs: Vec<InputId>,
    objectives: Vec<usize>,
}

impl ReductionResult {
    /// Objectives are written as block ids of the coverage file of `cm`.
    pub fn to_json(&self, cm: &CoverageMap) -> String {
        let index: BTreeMap<&BlockId, usize> = cm.blocks().enumerate().map(|(i, b)| (b, i)).collect();
        let file = ReductionFile {
            necessary: self.necessary.iter().copied().collect(),
            components: self
                .components
                .iter()
                .map(|c| ComponentEntry {
                    inputs: c.inputs.iter().copied().collect(),
                    objectives: c.objectives.iter().map(|b| index[b]).collect(),
                })
                .collect(),
            iterations: self.iterations,
        };
        serde_json::to_string_pretty(&file).expect("reduction serialization cannot fail")
    }

    pub fn from_json(text: &str, cm: &CoverageMap) -> Result<Self, ReductionError> {
        let file: ReductionFile = serde_json::from_str(text)?;
        let blocks: Vec<BlockId> = cm.blocks().copied().collect();
        let known = |i: &InputId| {
            if cm.contains_input(*i) {
                Ok(*i)
            } else {
                Err(ReductionError::Invalid(format!("unknown input {}", i.0)))
            }
        };
        let necessary = file.necessary.iter().map(known).collect::<Result<BTreeSet<_>, _>>()?;
        let mut used = necessary.clone();
        let mut components = Vec::new();
        for c in &file.components {
            let inputs = c.inputs.iter().map(known).collect::<Result<BTreeSet<_>, _>>()?;
            if inputs.iter().any(|i| !used.insert(*i)) {
                return Err(ReductionError::Invalid("components overlap".into()));
            }
            let objectives = c
                .objectives
                .iter()
                .map(|&b| {
                    blocks
                        .get(b)
                        .copied()
                        .ok_or_else(|| ReductionError::Invalid(format!("unknown block id {b}")))
                })
                .collect::<Result<BTreeSet<_>, _>>()?;
            if objectives.is_empty() {
                return Err(ReductionError::Invalid("component without objectives".into()));
            }
            components.push(Component { inputs, objectives });
        }
        Ok(ReductionResult { necessary, components, iterations: file.iterations, capped: BTreeSet::new() })
    }
}
