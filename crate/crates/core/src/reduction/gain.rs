//! Dense set-system view of an input set and the removal-order gain.

use std::collections::{BTreeMap, BTreeSet};

use fixedbitset::FixedBitSet;

use super::ReductionError;
use crate::blocks::{BlockId, CoverageMap};
use crate::ids::{CostMap, InputId};

/// Default bound on the number of redundant inputs for exhaustive gain.
pub const DEFAULT_GAIN_THRESHOLD: usize = 20;

/// Inputs indexed `0..n` in id order, blocks indexed `0..m` in block order.
/// Coverage is restricted to a set of objective blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct SetSystem {
    pub ids: Vec<InputId>,
    pub costs: Vec<u64>,
    pub blocks: Vec<BlockId>,
    /// Objective blocks covered by each input.
    pub cover: Vec<Vec<usize>>,
    /// Inputs covering each block.
    pub inputs_of: Vec<Vec<usize>>,
}

impl SetSystem {
    /// Restricts `cm` to `inputs` and `objectives`. Unknown costs count as 0.
    pub fn new(
        inputs: &BTreeSet<InputId>,
        cm: &CoverageMap,
        costs: &CostMap,
        objectives: &BTreeSet<BlockId>,
    ) -> Self {
        let ids: Vec<InputId> = inputs.iter().copied().collect();
        let blocks: Vec<BlockId> = cm
            .cover_of(inputs)
            .intersection(objectives)
            .copied()
            .collect();
        let index: BTreeMap<BlockId, usize> = blocks.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        let cover: Vec<Vec<usize>> = ids
            .iter()
            .map(|i| cm.cover(*i).iter().filter_map(|b| index.get(b).copied()).collect())
            .collect();
        let mut inputs_of = vec![Vec::new(); blocks.len()];
        for (i, bls) in cover.iter().enumerate() {
            for &b in bls {
                inputs_of[b].push(i);
            }
        }
        SetSystem {
            costs: ids.iter().map(|i| costs.get(i).copied().unwrap_or(0)).collect(),
            ids,
            blocks,
            cover,
            inputs_of,
        }
    }

    /// Objectives are everything `inputs` cover.
    pub fn full(inputs: &BTreeSet<InputId>, cm: &CoverageMap, costs: &CostMap) -> Self {
        let objectives = cm.cover_of(inputs);
        Self::new(inputs, cm, costs, &objectives)
    }

    /// Builds directly from dense data; mainly for generated instances.
    pub fn from_parts(costs: Vec<u64>, cover: Vec<Vec<usize>>, num_blocks: usize) -> Self {
        let mut inputs_of = vec![Vec::new(); num_blocks];
        for (i, bls) in cover.iter().enumerate() {
            for &b in bls {
                inputs_of[b].push(i);
            }
        }
        SetSystem {
            ids: (1..=costs.len() as u64).map(InputId).collect(),
            costs,
            blocks: (0..num_blocks).map(BlockId::simple).collect(),
            cover,
            inputs_of,
        }
    }

    pub fn num_inputs(&self) -> usize {
        self.ids.len()
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn empty_set(&self) -> FixedBitSet {
        FixedBitSet::with_capacity(self.ids.len())
    }

    pub fn all_set(&self) -> FixedBitSet {
        let mut s = self.empty_set();
        s.insert_range(..);
        s
    }

    pub fn index_of(&self, id: InputId) -> Option<usize> {
        self.ids.binary_search(&id).ok()
    }

    pub fn to_ids(&self, members: &FixedBitSet) -> BTreeSet<InputId> {
        members.ones().map(|i| self.ids[i]).collect()
    }

    pub fn from_ids<'a>(&self, ids: impl IntoIterator<Item = &'a InputId>) -> FixedBitSet {
        let mut s = self.empty_set();
        for id in ids {
            if let Some(i) = self.index_of(*id) {
                s.insert(i);
            }
        }
        s
    }

    pub fn cost(&self, members: &FixedBitSet) -> u64 {
        members.ones().map(|i| self.costs[i]).sum()
    }

    /// Superposition of every block: how many members cover it.
    pub fn superpositions(&self, members: &FixedBitSet) -> Vec<u32> {
        let mut counts = vec![0u32; self.blocks.len()];
        for i in members.ones() {
            for &b in &self.cover[i] {
                counts[b] += 1;
            }
        }
        counts
    }

    pub fn covers_all(&self, members: &FixedBitSet) -> bool {
        self.superpositions(members).iter().all(|&c| c > 0)
    }

    pub fn covers_block(&self, members: &FixedBitSet, block: usize) -> bool {
        self.inputs_of[block].iter().any(|&i| members.contains(i))
    }

    /// Redundant under the given superpositions: every covered objective is
    /// also covered by another member. Inputs covering no objective are
    /// vacuously redundant.
    pub fn is_redundant(&self, input: usize, counts: &[u32]) -> bool {
        self.cover[input].iter().all(|&b| counts[b] >= 2)
    }

    pub fn redundant(&self, members: &FixedBitSet) -> Vec<usize> {
        let counts = self.superpositions(members);
        members.ones().filter(|&i| self.is_redundant(i, &counts)).collect()
    }

    /// Exhaustive gain over canonical removal orders.
    ///
    /// Only inputs redundant in `members` can appear in a valid order, since
    /// removal steps never raise redundancy. Orders are explored in
    /// increasing index order with a suffix-cost bound.
    pub fn gain(&self, members: &FixedBitSet, threshold: usize) -> Result<Gain, ReductionError> {
        let candidates = self.redundant(members);
        if candidates.len() > threshold {
            return Err(ReductionError::GainThreshold { redundant: candidates.len(), threshold });
        }
        let mut suffix = vec![0u64; candidates.len() + 1];
        for k in (0..candidates.len()).rev() {
            suffix[k] = suffix[k + 1] + self.costs[candidates[k]];
        }
        let mut search = GainSearch {
            sys: self,
            candidates: &candidates,
            suffix: &suffix,
            counts: self.superpositions(members),
            current: Vec::new(),
            current_cost: 0,
            best: Vec::new(),
            best_cost: 0,
        };
        search.explore(0);
        Ok(Gain { value: search.best_cost, order: search.best, exact: true })
    }

    /// Repeatedly removes the most costly currently redundant member, lowest
    /// index first on ties. A lower bound on the exact gain.
    pub fn greedy_gain(&self, members: &FixedBitSet) -> Gain {
        let mut counts = self.superpositions(members);
        let mut alive = members.clone();
        let mut order = Vec::new();
        let mut value = 0;
        loop {
            let pick = alive
                .ones()
                .filter(|&i| self.is_redundant(i, &counts))
                .fold(None, |best: Option<usize>, i| match best {
                    Some(b) if self.costs[b] >= self.costs[i] => Some(b),
                    _ => Some(i),
                });
            let Some(i) = pick else { break };
            alive.set(i, false);
            for &b in &self.cover[i] {
                counts[b] -= 1;
            }
            value += self.costs[i];
            order.push(i);
        }
        Gain { value, order, exact: false }
    }

    /// Exact gain when possible, greedy otherwise (logged).
    pub fn gain_or_greedy(&self, members: &FixedBitSet, threshold: usize) -> Gain {
        match self.gain(members, threshold) {
            Ok(g) => g,
            Err(e) => {
                log::warn!("{e}; falling back to greedy removal");
                self.greedy_gain(members)
            }
        }
    }

    /// Applies the removal order of `gain` to `members`.
    pub fn apply(&self, members: &FixedBitSet, gain: &Gain) -> FixedBitSet {
        let mut out = members.clone();
        for &i in &gain.order {
            out.set(i, false);
        }
        out
    }

    /// Checks that `order` is a valid sequence of removal steps in `members`.
    pub fn is_valid_order(&self, members: &FixedBitSet, order: &[usize]) -> bool {
        let mut counts = self.superpositions(members);
        let mut alive = members.clone();
        for &i in order {
            if !alive.contains(i) || !self.is_redundant(i, &counts) {
                return false;
            }
            alive.set(i, false);
            for &b in &self.cover[i] {
                counts[b] -= 1;
            }
        }
        true
    }
}

/// Removed cost of a best removal order, with one such order (as indices).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gain {
    pub value: u64,
    pub order: Vec<usize>,
    /// False when produced by the greedy fallback.
    pub exact: bool,
}

struct GainSearch<'a> {
    sys: &'a SetSystem,
    candidates: &'a [usize],
    suffix: &'a [u64],
    counts: Vec<u32>,
    current: Vec<usize>,
    current_cost: u64,
    best: Vec<usize>,
    best_cost: u64,
}

impl GainSearch<'_> {
    fn explore(&mut self, from: usize) {
        if self.current_cost > self.best_cost {
            self.best_cost = self.current_cost;
            self.best = self.current.clone();
        }
        for k in from..self.candidates.len() {
            if self.current_cost + self.suffix[k] <= self.best_cost {
                return;
            }
            let i = self.candidates[k];
            if !self.sys.is_redundant(i, &self.counts) {
                continue;
            }
            for &b in &self.sys.cover[i] {
                self.counts[b] -= 1;
            }
            self.current.push(i);
            self.current_cost += self.sys.costs[i];
            self.explore(k + 1);
            self.current_cost -= self.sys.costs[i];
            self.current.pop();
            for &b in &self.sys.cover[i] {
                self.counts[b] += 1;
            }
        }
    }
}

/// Gain of `inputs` over everything they cover, with a maximizing order.
pub fn valid_orders_gain(
    inputs: &BTreeSet<InputId>,
    cm: &CoverageMap,
    costs: &CostMap,
    threshold: usize,
) -> Result<(u64, Vec<InputId>), ReductionError> {
    let sys = SetSystem::full(inputs, cm, costs);
    let g = sys.gain(&sys.all_set(), threshold)?;
    Ok((g.value, g.order.iter().map(|&i| sys.ids[i]).collect()))
}
