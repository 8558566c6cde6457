//! Many-objective genetic search run on one component.
//!
//! Two populations evolve together: *roofers*, the cheapest individuals seen
//! so far that cover every objective, and *misers*, a Pareto archive of
//! individuals that do not cover everything but trade coverage for cost.
//! Parents are usually one of each, so offspring tend to inherit the
//! roofer's coverage and the miser's thrift.

mod fitness;

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blocks::CoverageMap;
use crate::ids::{CostMap, InputId};
use crate::reduction::{Component, SetSystem, DEFAULT_GAIN_THRESHOLD};

pub use fitness::{dominates, normalize_cost};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SearchError {
    #[error("fitness vectors have different lengths ({0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("population size must be at least 2, got {0}")]
    PopulationTooSmall(usize),
    #[error("component has no inputs")]
    EmptyComponent,
    #[error("objective {0} is covered by no input of the component")]
    UncoverableObjective(usize),
}

/// A component as a dense set system over its objectives.
#[derive(Debug, Clone)]
pub struct ComponentProblem {
    pub sys: SetSystem,
    pub gain_threshold: usize,
}

impl ComponentProblem {
    pub fn new(component: &Component, cm: &CoverageMap, costs: &CostMap) -> Result<Self, SearchError> {
        Self::from_system(SetSystem::new(&component.inputs, cm, costs, &component.objectives))
    }

    pub fn from_system(sys: SetSystem) -> Result<Self, SearchError> {
        if sys.num_inputs() == 0 {
            return Err(SearchError::EmptyComponent);
        }
        if let Some(b) = (0..sys.num_blocks()).find(|&b| sys.inputs_of[b].is_empty()) {
            return Err(SearchError::UncoverableObjective(b));
        }
        Ok(ComponentProblem { sys, gain_threshold: DEFAULT_GAIN_THRESHOLD })
    }

    pub fn with_gain_threshold(mut self, threshold: usize) -> Self {
        self.gain_threshold = threshold;
        self
    }

    /// Gain over the component objectives.
    pub fn gain_of(&self, members: &FixedBitSet) -> u64 {
        self.sys.gain_or_greedy(members, self.gain_threshold).value
    }

    /// `members` after a best order of removal steps.
    pub fn reduce(&self, members: &FixedBitSet) -> FixedBitSet {
        let g = self.sys.gain_or_greedy(members, self.gain_threshold);
        self.sys.apply(members, &g)
    }

    pub fn is_reduced(&self, members: &FixedBitSet) -> bool {
        self.sys.redundant(members).is_empty()
    }

    pub fn individual(&self, members: FixedBitSet) -> Individual {
        let cost = self.sys.cost(&members);
        let fitness = self.fitness(&members);
        Individual { members, cost, fitness }
    }

    pub fn ids(&self, members: &FixedBitSet) -> BTreeSet<InputId> {
        self.sys.to_ids(members)
    }
}

/// A candidate subset of the component's inputs with its cached cost and
/// fitness vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub members: FixedBitSet,
    pub cost: u64,
    pub fitness: Vec<f64>,
}

impl Individual {
    /// Sum of the coverage entries of the fitness vector.
    pub fn exposure(&self) -> f64 {
        self.fitness[1..].iter().sum()
    }

    pub fn covers_all(&self) -> bool {
        self.fitness[1..].iter().all(|&f| f == 0.0)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Populations {
    pub roofers: Vec<Individual>,
    pub misers: Vec<Individual>,
    /// How often each input was picked while building the initial roofers.
    pub occurrence: Vec<u32>,
}

impl Populations {
    fn contains(&self, members: &FixedBitSet) -> bool {
        self.roofers.iter().chain(&self.misers).any(|i| &i.members == members)
    }

    pub fn min_roofer_cost(&self) -> Option<u64> {
        self.roofers.iter().map(|r| r.cost).min()
    }
}

/// Builds `n_size` covering individuals. For each one the objectives are
/// visited in a fresh random order; an uncovered objective gets one of its
/// inputs, favoring inputs picked less often so far, and the individual is
/// reduced after every addition.
pub fn init_roofers(problem: &ComponentProblem, n_size: usize, rng: &mut impl Rng) -> Result<Populations, SearchError> {
    if n_size < 2 {
        return Err(SearchError::PopulationTooSmall(n_size));
    }
    let sys = &problem.sys;
    let mut occurrence = vec![0u32; sys.num_inputs()];
    let mut roofers = Vec::with_capacity(n_size);
    let mut order: Vec<usize> = (0..sys.num_blocks()).collect();
    for _ in 0..n_size {
        order.shuffle(rng);
        let mut members = sys.empty_set();
        for &bl in &order {
            if sys.covers_block(&members, bl) {
                continue;
            }
            let candidates = &sys.inputs_of[bl];
            let weights: Vec<f64> = candidates.iter().map(|&i| 1.0 / (1.0 + occurrence[i] as f64)).collect();
            let pick = candidates[WeightedIndex::new(&weights).expect("positive weights").sample(rng)];
            occurrence[pick] += 1;
            members.insert(pick);
            members = problem.reduce(&members);
        }
        roofers.push(problem.individual(members));
    }
    Ok(Populations { roofers, misers: Vec::new(), occurrence })
}

/// Two parents: a roofer (weight `1/cost`) and a miser (weight
/// `1/exposure`) when misers exist, otherwise two distinct roofers.
pub fn select_parents<'a>(pops: &'a Populations, rng: &mut impl Rng) -> (&'a Individual, &'a Individual) {
    let roofer_weights: Vec<f64> = pops.roofers.iter().map(|r| 1.0 / r.cost.max(1) as f64).collect();
    let first = WeightedIndex::new(&roofer_weights).expect("roofers exist").sample(rng);
    if !pops.misers.is_empty() {
        let miser_weights: Vec<f64> = pops.misers.iter().map(|m| 1.0 / m.exposure()).collect();
        let m = WeightedIndex::new(&miser_weights).expect("miser exposure is positive").sample(rng);
        return (&pops.roofers[first], &pops.misers[m]);
    }
    let mut rest = roofer_weights;
    rest[first] = 0.0;
    let second = match WeightedIndex::new(&rest) {
        Ok(w) => w.sample(rng),
        Err(_) => first,
    };
    (&pops.roofers[first], &pops.roofers[second])
}

/// Swaps the halves of two parents along a random balanced split of the
/// objectives. With an odd number of objectives the first half is larger.
pub fn crossover(
    problem: &ComponentProblem,
    p1: &FixedBitSet,
    p2: &FixedBitSet,
    rng: &mut impl Rng,
) -> (FixedBitSet, FixedBitSet) {
    let sys = &problem.sys;
    let mut objectives: Vec<usize> = (0..sys.num_blocks()).collect();
    objectives.shuffle(rng);
    let half = objectives.len().div_ceil(2);
    let mut s1 = sys.empty_set();
    let mut s2 = sys.empty_set();
    for (k, &bl) in objectives.iter().enumerate() {
        let target = if k < half { &mut s1 } else { &mut s2 };
        for &i in &sys.inputs_of[bl] {
            target.insert(i);
        }
    }
    crossover_with_split(p1, p2, &s1, &s2)
}

/// `((p1∩S1)∪(p2∩S2), (p2∩S1)∪(p1∩S2))`.
pub fn crossover_with_split(
    p1: &FixedBitSet,
    p2: &FixedBitSet,
    s1: &FixedBitSet,
    s2: &FixedBitSet,
) -> (FixedBitSet, FixedBitSet) {
    let part = |a: &FixedBitSet, s: &FixedBitSet| {
        let mut x = a.clone();
        x.intersect_with(s);
        x
    };
    let mut c1 = part(p1, s1);
    c1.union_with(&part(p2, s2));
    let mut c2 = part(p2, s1);
    c2.union_with(&part(p1, s2));
    (c1, c2)
}

/// Toggles one uniformly chosen input, then reduces.
pub fn mutate(problem: &ComponentProblem, child: &FixedBitSet, rng: &mut impl Rng) -> FixedBitSet {
    let mut out = child.clone();
    out.toggle(rng.gen_range(0..problem.sys.num_inputs()));
    problem.reduce(&out)
}

/// What happened to one offspring during the population update.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateOutcome {
    Empty,
    Duplicate,
    RooferAccepted,
    RooferRejected,
    MiserAccepted,
    MiserRejected,
}

/// Offers one offspring to the populations.
pub fn update_populations(
    pops: &mut Populations,
    problem: &ComponentProblem,
    offspring: FixedBitSet,
    rng: &mut impl Rng,
) -> UpdateOutcome {
    if offspring.is_clear() {
        return UpdateOutcome::Empty;
    }
    if pops.contains(&offspring) {
        return UpdateOutcome::Duplicate;
    }
    let candidate = problem.individual(offspring);
    if candidate.covers_all() {
        let max = pops.roofers.iter().map(|r| r.cost).max().expect("roofers exist");
        if candidate.cost > max {
            return UpdateOutcome::RooferRejected;
        }
        let costliest: Vec<usize> = (0..pops.roofers.len()).filter(|&i| pops.roofers[i].cost == max).collect();
        let victim = costliest[rng.gen_range(0..costliest.len())];
        pops.roofers[victim] = candidate;
        return UpdateOutcome::RooferAccepted;
    }
    let rejected = pops
        .misers
        .iter()
        .any(|m| dominates(&m.fitness, &candidate.fitness).expect("same component"));
    if rejected {
        return UpdateOutcome::MiserRejected;
    }
    pops.misers
        .retain(|m| !dominates(&candidate.fitness, &m.fitness).expect("same component"));
    pops.misers.push(candidate);
    UpdateOutcome::MiserAccepted
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoccoParams {
    pub n_size: usize,
    pub generations: usize,
    /// Wall-clock budget per component; unlimited when `None`.
    pub time_budget_ms: Option<u64>,
    pub seed: u64,
}

impl Default for MoccoParams {
    fn default() -> Self {
        MoccoParams { n_size: 20, generations: 100, time_budget_ms: None, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MoccoResult {
    pub members: BTreeSet<InputId>,
    pub cost: u64,
    pub generations: usize,
    pub num_misers: usize,
}

/// Runs the search and returns a cheapest roofer (seeded choice on ties).
pub fn mocco_run(problem: &ComponentProblem, params: &MoccoParams) -> Result<MoccoResult, SearchError> {
    mocco_run_observed(problem, params, |_, _| {})
}

/// Like [`mocco_run`], calling `observer(generation, populations)` after
/// initialization (generation 0) and after every generation.
pub fn mocco_run_observed(
    problem: &ComponentProblem,
    params: &MoccoParams,
    mut observer: impl FnMut(usize, &Populations),
) -> Result<MoccoResult, SearchError> {
    let started = Instant::now();
    let budget = params.time_budget_ms.map(Duration::from_millis);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut pops = init_roofers(problem, params.n_size, &mut rng)?;
    observer(0, &pops);
    let mut generation = 0;
    // A single input leaves nothing to explore.
    let trivial = problem.sys.num_inputs() == 1;
    while !trivial && generation < params.generations {
        if budget.is_some_and(|b| started.elapsed() >= b) {
            break;
        }
        generation += 1;
        let (p1, p2) = select_parents(&pops, &mut rng);
        let (c1, c2) = crossover(problem, &p1.members, &p2.members, &mut rng);
        let c1 = mutate(problem, &c1, &mut rng);
        let c2 = mutate(problem, &c2, &mut rng);
        update_populations(&mut pops, problem, c1, &mut rng);
        update_populations(&mut pops, problem, c2, &mut rng);
        observer(generation, &pops);
    }
    let min = pops.min_roofer_cost().expect("roofers exist");
    let cheapest: Vec<&Individual> = pops.roofers.iter().filter(|r| r.cost == min).collect();
    let chosen = cheapest[rng.gen_range(0..cheapest.len())];
    Ok(MoccoResult {
        members: problem.ids(&chosen.members),
        cost: chosen.cost,
        generations: generation,
        num_misers: pops.misers.len(),
    })
}

/// Minimizes every component in parallel. Component `i` uses seed
/// `params.seed ^ i`; results keep component order.
pub fn minimize_components(
    components: &[Component],
    cm: &CoverageMap,
    costs: &CostMap,
    params: &MoccoParams,
    gain_threshold: usize,
) -> Result<Vec<MoccoResult>, SearchError> {
    components
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let problem = ComponentProblem::new(c, cm, costs)?.with_gain_threshold(gain_threshold);
            mocco_run(&problem, &MoccoParams { seed: params.seed ^ i as u64, ..*params })
        })
        .collect()
}
