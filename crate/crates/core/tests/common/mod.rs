#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use covmin::reduction::SetSystem;
use covmin::{CostMap, CoverageMap, InputId};

/// Random cover lists: every input covers at least one block.
pub fn random_cover(rng: &mut impl Rng, n: usize, m: usize, density: f64) -> Vec<Vec<usize>> {
    (0..n)
        .map(|_| {
            let mut c: Vec<usize> = (0..m).filter(|_| rng.gen_bool(density)).collect();
            if c.is_empty() {
                c.push(rng.gen_range(0..m));
            }
            c
        })
        .collect()
}

/// Coverage map with ids `1..=n` over blocks `0..m`, and random costs.
pub fn random_instance(rng: &mut impl Rng, max_inputs: usize, max_blocks: usize) -> (CoverageMap, CostMap) {
    let n = rng.gen_range(1..=max_inputs);
    let m = rng.gen_range(1..=max_blocks);
    let density = rng.gen_range(0.15..0.6);
    let cover = random_cover(rng, n, m, density);
    let costs = (1..=n as u64).map(|i| (InputId(i), rng.gen_range(1..=10))).collect();
    (to_map(&cover), costs)
}

pub fn to_map(cover: &[Vec<usize>]) -> CoverageMap {
    CoverageMap::from_pairs(cover.iter().enumerate().map(|(i, c)| (i as u64 + 1, c.as_slice()))).unwrap()
}

pub fn ids(cm: &CoverageMap) -> BTreeSet<InputId> {
    cm.inputs().collect()
}

/// Connected components of the overlap relation, by union-find.
pub fn overlap_components(inputs: &BTreeSet<InputId>, cm: &CoverageMap) -> Vec<BTreeSet<InputId>> {
    let list: Vec<InputId> = inputs.iter().copied().collect();
    let mut parent: Vec<usize> = (0..list.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for a in 0..list.len() {
        for b in a + 1..list.len() {
            if !cm.cover(list[a]).is_disjoint(cm.cover(list[b])) {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                parent[ra] = rb;
            }
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<InputId>> = BTreeMap::new();
    for (k, id) in list.iter().enumerate() {
        let root = find(&mut parent, k);
        groups.entry(root).or_default().insert(*id);
    }
    groups.into_values().collect()
}

/// Best removed cost over every sequence of removal steps.
pub fn permutation_gain(sys: &SetSystem) -> u64 {
    fn rec(sys: &SetSystem, alive: &mut fixedbitset::FixedBitSet, cost: u64, best: &mut u64) {
        *best = (*best).max(cost);
        let counts = sys.superpositions(alive);
        let choices: Vec<usize> = alive.ones().filter(|&i| sys.is_redundant(i, &counts)).collect();
        for i in choices {
            alive.set(i, false);
            rec(sys, alive, cost + sys.costs[i], best);
            alive.set(i, true);
        }
    }
    let mut best = 0;
    rec(sys, &mut sys.all_set(), 0, &mut best);
    best
}

/// Cheapest covering subset by enumerating all 2ⁿ subsets.
pub fn brute_force_optimum(sys: &SetSystem) -> Option<u64> {
    let n = sys.num_inputs();
    assert!(n <= 20);
    let mut best: Option<u64> = None;
    for mask in 0u32..(1 << n) {
        let mut covered = vec![false; sys.num_blocks()];
        let mut cost = 0;
        for i in 0..n {
            if mask & (1 << i) != 0 {
                cost += sys.costs[i];
                for &b in &sys.cover[i] {
                    covered[b] = true;
                }
            }
        }
        if covered.iter().all(|&c| c) && best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
    }
    best
}

/// A connected component where every objective has at least two inputs.
pub fn random_component(rng: &mut impl Rng, max_inputs: usize, max_objectives: usize) -> SetSystem {
    loop {
        let n = rng.gen_range(3..=max_inputs);
        let m = rng.gen_range(2..=max_objectives);
        let density = rng.gen_range(0.2..0.45);
        let mut cover = random_cover(rng, n, m, density);
        for b in 0..m {
            while cover.iter().filter(|c| c.contains(&b)).count() < 2 {
                let i = rng.gen_range(0..n);
                if !cover[i].contains(&b) {
                    cover[i].push(b);
                }
            }
        }
        let cm = to_map(&cover);
        let all = ids(&cm);
        if overlap_components(&all, &cm).len() != 1 {
            continue;
        }
        let costs = (0..n).map(|_| rng.gen_range(1..=20)).collect();
        return SetSystem::from_parts(costs, cover, m);
    }
}
