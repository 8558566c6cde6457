//! Potential, objective values and fitness vectors.

use std::collections::HashMap;

use fixedbitset::FixedBitSet;

use super::{ComponentProblem, SearchError};

/// `ω(cost) = cost / (cost + 1)`.
pub fn normalize_cost(cost: u64) -> f64 {
    cost as f64 / (cost as f64 + 1.0)
}

/// Pareto dominance for minimization.
pub fn dominates(f1: &[f64], f2: &[f64]) -> Result<bool, SearchError> {
    if f1.len() != f2.len() {
        return Err(SearchError::LengthMismatch(f1.len(), f2.len()));
    }
    let no_worse = f1.iter().zip(f2).all(|(a, b)| a <= b);
    let better = f1.iter().zip(f2).any(|(a, b)| a < b);
    Ok(no_worse && better)
}

impl ComponentProblem {
    /// Best benefit-cost balance of adding one input covering `block`,
    /// shifted by the cheapest such input so it is never negative:
    /// `max_in [gain(I ∪ {in}) − cost(in)] + min_in cost(in)`.
    pub fn potential(&self, members: &FixedBitSet, block: usize) -> u64 {
        self.potential_cached(members, block, &mut HashMap::new())
    }

    fn potential_cached(&self, members: &FixedBitSet, block: usize, cache: &mut HashMap<usize, u64>) -> u64 {
        let sys = &self.sys;
        let candidates = &sys.inputs_of[block];
        let mut best = i128::MIN;
        for &i in candidates {
            let gain = *cache.entry(i).or_insert_with(|| {
                let mut with = members.clone();
                with.insert(i);
                self.gain_of(&with)
            });
            best = best.max(gain as i128 - sys.costs[i] as i128);
        }
        let min_cost = candidates.iter().map(|&i| sys.costs[i]).min().expect("objective has inputs");
        u64::try_from(best + min_cost as i128).expect("shifted potential is non-negative")
    }

    /// 0 for a covered block, otherwise `1 / (potential + 1)`.
    pub fn objective_value(&self, members: &FixedBitSet, block: usize) -> f64 {
        if self.sys.covers_block(members, block) {
            0.0
        } else {
            1.0 / (self.potential(members, block) as f64 + 1.0)
        }
    }

    /// `[ω(cost), f_bl1, …, f_bln]` with blocks in ascending order.
    pub fn fitness(&self, members: &FixedBitSet) -> Vec<f64> {
        let mut cache = HashMap::new();
        let mut out = Vec::with_capacity(self.sys.num_blocks() + 1);
        out.push(normalize_cost(self.sys.cost(members)));
        for b in 0..self.sys.num_blocks() {
            out.push(if self.sys.covers_block(members, b) {
                0.0
            } else {
                1.0 / (self.potential_cached(members, b, &mut cache) as f64 + 1.0)
            });
        }
        out
    }

    /// Sum of the objective values.
    pub fn exposure(&self, members: &FixedBitSet) -> f64 {
        self.fitness(members)[1..].iter().sum()
    }
}
