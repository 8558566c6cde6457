//! Acceptance checks. Runs without the libtest harness so every criterion
//! prints exactly one PASS/FAIL line, then exits non-zero if any failed.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use covmin::baselines::{
    a12_effect_size, art_select, exhaustive_optimal, greedy_cover, optimal_cover, random_cover, random_select,
};
use covmin::dataset::{load_dataset, Param, Url};
use covmin::distance::{bag_distance, levenshtein, levenshtein_str, param_distance, url_distance};
use covmin::harness::synthetic::{planted_components, BUNDLED_PATH};
use covmin::harness::{run_pipeline, RunConfig};
use covmin::reduction::{
    check_local_dominance, redundancy, remove_duplicates, Component, Dominance, SearchState, SetSystem,
};
use covmin::search::{crossover_with_split, dominates, mocco_run_observed, ComponentProblem, MoccoParams};
use covmin::{total_cost, CoverageMap, InputId};

use common::*;

// pinned tolerances and sizes
const PARAM_EXPECTED: f64 = 0.71;
const PARAM_TOL: f64 = 0.005;
const FIXTURE_BUDGET: Duration = Duration::from_secs(1);
const PROPERTY_INSTANCES: usize = 500;
const PROPERTY_MAX_INPUTS: usize = 10;
const PROPERTY_MAX_BLOCKS: usize = 12;
const PROPERTY_BUDGET: Duration = Duration::from_secs(120);
const MOCCO_RUNS: usize = 30;
const MOCCO_MAX_INPUTS: usize = 12;
const MOCCO_MAX_OBJECTIVES: usize = 10;
const MOCCO_GENERATIONS: usize = 200;
const MOCCO_MIN_EXACT: f64 = 0.9;
const MOCCO_MAX_GAP: f64 = 0.05;
const MOCCO_BUDGET: Duration = Duration::from_secs(60);
const DISTANCE_SAMPLES: usize = 10_000;
const SYNTHETIC_MIN_INPUTS: usize = 40;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bits(n: usize, ones: &[usize]) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    for &i in ones {
        s.insert(i);
    }
    s
}

fn greedy_fixture() -> (CoverageMap, covmin::CostMap) {
    // in1:{bl1,bl2} 2, in2:{bl1,bl3} 3, in3:{bl2,bl4} 3
    let cm = to_map(&[vec![0, 1], vec![0, 2], vec![1, 3]]);
    let costs = [(InputId(1), 2), (InputId(2), 3), (InputId(3), 3)].into();
    (cm, costs)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let login = Url::parse("http://hostname/login").unwrap();
    let build = Url::parse("http://hostname/job/try1/lastBuild").unwrap();
    let d = url_distance(&login, &build);
    ensure(d == 4, || format!("url distance {d}, expected 4"))?;

    let a = [Param::int("page", 10), Param::text("username", "John"), Param::text("password", "qwerty")];
    let b = [Param::int("page", 42), Param::text("username", "Johnny"), Param::text("password", "qwertyuiop")];
    let p = param_distance(&a, &b);
    ensure((p - PARAM_EXPECTED).abs() <= PARAM_TOL, || format!("param distance {p}"))?;

    let (l1, l2) = (levenshtein_str("John", "Johnny"), levenshtein_str("qwerty", "qwertyuiop"));
    ensure((l1, l2) == (2, 4), || format!("levenshtein {l1}, {l2}"))?;

    let (i3, i4) = crossover_with_split(
        &bits(5, &[0, 2, 3]),
        &bits(5, &[1, 4]),
        &bits(5, &[0, 1, 2]),
        &bits(5, &[2, 3, 4]),
    );
    ensure(i3 == bits(5, &[0, 2, 4]) && i4 == bits(5, &[1, 2, 3]), || {
        format!("crossover gave {:?} / {:?}", i3.ones().collect::<Vec<_>>(), i4.ones().collect::<Vec<_>>())
    })?;

    let (cm, costs) = greedy_fixture();
    let all = ids(&cm);
    let greedy = greedy_cover(&cm.all_blocks(), &all, &cm, &costs).unwrap();
    let component = Component { inputs: all, objectives: cm.all_blocks() };
    let best = exhaustive_optimal(&component, &cm, &costs).unwrap();
    ensure(greedy.total_cost == 8 && best.total_cost == 6, || {
        format!("greedy {} vs optimal {}", greedy.total_cost, best.total_cost)
    })?;
    ensure(best.selected == [InputId(2), InputId(3)].into(), || format!("optimal set {:?}", best.selected))?;

    let took = start.elapsed();
    ensure(took < FIXTURE_BUDGET, || format!("took {took:?}"))?;
    Ok(format!("url 4, param {p:.4}, lev 2/4, crossover, greedy 8 vs 6 in {took:?}"))
}

/// Random subset of `all`, never empty.
fn random_subset(rng: &mut impl Rng, all: &BTreeSet<InputId>) -> BTreeSet<InputId> {
    loop {
        let s: BTreeSet<InputId> = all.iter().copied().filter(|_| rng.gen_bool(0.7)).collect();
        if !s.is_empty() {
            return s;
        }
    }
}

fn has_cycle(edges: &BTreeMap<InputId, BTreeSet<InputId>>) -> bool {
    // 0 unvisited, 1 on stack, 2 done
    fn visit(
        n: InputId,
        edges: &BTreeMap<InputId, BTreeSet<InputId>>,
        state: &mut BTreeMap<InputId, u8>,
    ) -> bool {
        match state.get(&n).copied().unwrap_or(0) {
            1 => return true,
            2 => return false,
            _ => {}
        }
        state.insert(n, 1);
        for &m in edges.get(&n).into_iter().flatten() {
            if visit(m, edges, state) {
                return true;
            }
        }
        state.insert(n, 2);
        false
    }
    let mut state = BTreeMap::new();
    edges.keys().any(|&n| visit(n, edges, &mut state))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0002);
    let mut dominance_edges = 0usize;
    for k in 0..PROPERTY_INSTANCES {
        let (cm, costs) = random_instance(&mut rng, PROPERTY_MAX_INPUTS, PROPERTY_MAX_BLOCKS);
        let all = ids(&cm);
        let set = random_subset(&mut rng, &all);
        let covered = cm.cover_of(&set);

        // redundancy soundness: removable without loss iff redundancy ≥ 1
        for &input in &set {
            let mut rest = set.clone();
            rest.remove(&input);
            let keeps = cm.cover_of(&rest) == covered;
            let r = redundancy(input, &set, &cm).unwrap();
            ensure(keeps == (r >= 1), || format!("instance {k}: redundancy {r} of {input} but keeps={keeps}"))?;
        }

        let sys = SetSystem::new(&set, &cm, &costs, &covered);
        let members = sys.all_set();
        let gain = sys.gain(&members, usize::MAX).unwrap();

        // any permutation of a witness order is valid
        let mut shuffled = gain.order.clone();
        for _ in 0..5 {
            shuffled.shuffle(&mut rng);
            ensure(sys.is_valid_order(&members, &shuffled), || format!("instance {k}: shuffled order invalid"))?;
        }
        ensure(sys.is_valid_order(&members, &gain.order), || format!("instance {k}: witness invalid"))?;

        // canonical search equals enumeration of every order
        let oracle = permutation_gain(&sys);
        ensure(gain.value == oracle, || format!("instance {k}: canonical {} vs permutations {oracle}", gain.value))?;

        // decomposition over overlap components, and concatenated orders
        let mut total = 0;
        let mut concatenated = Vec::new();
        for comp in overlap_components(&set, &cm) {
            let sub = SetSystem::new(&comp, &cm, &costs, &cm.cover_of(&comp));
            let g = sub.gain(&sub.all_set(), usize::MAX).unwrap();
            total += g.value;
            concatenated.extend(g.order.iter().map(|&i| sys.index_of(sub.ids[i]).unwrap()));
        }
        ensure(total == gain.value, || format!("instance {k}: Σ component gains {total} vs {}", gain.value))?;
        ensure(sys.is_valid_order(&members, &concatenated), || format!("instance {k}: concatenated order invalid"))?;

        // local dominance is acyclic once duplicates are gone
        let state = remove_duplicates(&SearchState::initial(&set, &cm), &cm, &costs);
        let mut edges = BTreeMap::new();
        for &input in &state.search {
            if let Dominance::By(s) = check_local_dominance(input, &state, &cm, &costs, usize::MAX) {
                let needed = state.objective_cover(input, &cm);
                ensure(needed.is_subset(&cm.cover_of(&s)) && total_cost(&costs, &s) <= costs[&input], || {
                    format!("instance {k}: bad dominating set for {input}")
                })?;
                dominance_edges += s.len();
                edges.insert(input, s);
            }
        }
        ensure(!has_cycle(&edges), || format!("instance {k}: dominance cycle"))?;
    }
    let took = start.elapsed();
    ensure(took < PROPERTY_BUDGET, || format!("took {took:?}"))?;
    Ok(format!("{PROPERTY_INSTANCES} instances, {dominance_edges} dominance edges, 0 violations in {took:?}"))
}

#[derive(Default)]
struct InvariantLog {
    generations: usize,
    violations: Vec<String>,
}

fn check_generation(
    problem: &ComponentProblem,
    n_size: usize,
    pops: &covmin::search::Populations,
    last_min: &mut Option<u64>,
    shadow: &mut Vec<(FixedBitSet, Vec<f64>)>,
    log: &mut InvariantLog,
) {
    let mut fail = |m: String| log.violations.push(m);
    if pops.roofers.len() != n_size {
        fail(format!("{} roofers", pops.roofers.len()));
    }
    for r in &pops.roofers {
        if !problem.sys.covers_all(&r.members) {
            fail("roofer misses an objective".into());
        }
        if !problem.is_reduced(&r.members) {
            fail("roofer not reduced".into());
        }
        if r.cost != problem.sys.cost(&r.members) {
            fail("roofer cost stale".into());
        }
    }
    let min = pops.min_roofer_cost();
    if let (Some(prev), Some(now)) = (*last_min, min) {
        if now > prev {
            fail(format!("min roofer cost rose {prev} -> {now}"));
        }
    }
    *last_min = min;
    for m in &pops.misers {
        if problem.sys.covers_all(&m.members) {
            fail("miser covers everything".into());
        }
        if !problem.is_reduced(&m.members) {
            fail("miser not reduced".into());
        }
        if shadow.iter().any(|(_, f)| dominates(f, &m.fitness).unwrap()) {
            fail("miser dominated by a current or past miser".into());
        }
    }
    for m in &pops.misers {
        if !shadow.iter().any(|(s, _)| *s == m.members) {
            shadow.push((m.members.clone(), m.fitness.clone()));
        }
    }
    log.generations += 1;
}

/// Criteria 3 and 4 share the same runs.
fn criteria_3_and_4() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0003);
    let mut exact = 0;
    let mut worst_gap: f64 = 0.0;
    let mut gaps = Vec::new();
    let mut log = InvariantLog::default();
    let n_size = 20;
    for run in 0..MOCCO_RUNS {
        let sys = random_component(&mut rng, MOCCO_MAX_INPUTS, MOCCO_MAX_OBJECTIVES);
        let (optimum, _) = optimal_cover(&sys).expect("components are coverable");
        let brute = brute_force_optimum(&sys).unwrap();
        if brute != optimum {
            return (Err(format!("run {run}: branch and bound {optimum} vs enumeration {brute}")), Err("skipped".into()));
        }
        let problem = ComponentProblem::from_system(sys).unwrap();
        let params = MoccoParams { n_size, generations: MOCCO_GENERATIONS, time_budget_ms: None, seed: run as u64 };
        let mut last_min = None;
        let mut shadow = Vec::new();
        let result = mocco_run_observed(&problem, &params, |_, pops| {
            check_generation(&problem, n_size, pops, &mut last_min, &mut shadow, &mut log)
        })
        .unwrap();
        let gap = (result.cost as f64 - optimum as f64) / optimum as f64;
        if result.cost == optimum {
            exact += 1;
        } else {
            gaps.push(format!("run {run}: {} vs {optimum}", result.cost));
        }
        worst_gap = worst_gap.max(gap);
    }
    let took = start.elapsed();
    let rate = exact as f64 / MOCCO_RUNS as f64;
    let c3 = if rate >= MOCCO_MIN_EXACT && worst_gap <= MOCCO_MAX_GAP && took < MOCCO_BUDGET {
        Ok(format!("{exact}/{MOCCO_RUNS} optimal, worst gap {:.1}% in {took:?}", worst_gap * 100.0))
    } else {
        Err(format!(
            "{exact}/{MOCCO_RUNS} optimal, worst gap {:.1}% in {took:?} [{}]",
            worst_gap * 100.0,
            gaps.join("; ")
        ))
    };
    let c4 = if log.violations.is_empty() {
        Ok(format!("{} generations checked, 0 violations", log.generations))
    } else {
        Err(format!("{} violation(s), first: {}", log.violations.len(), log.violations[0]))
    };
    (c3, c4)
}

fn criterion_5() -> Outcome {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(BUNDLED_PATH);
    let dataset = load_dataset(&path).map_err(|e| e.to_string())?;
    ensure(dataset.inputs.len() >= SYNTHETIC_MIN_INPUTS, || format!("{} inputs", dataset.inputs.len()))?;
    let cfg = RunConfig::default();
    let seed = 17;

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut files = Vec::new();
    let mut first = None;
    for dir in &dirs {
        let run = run_pipeline(&dataset, &cfg, seed).map_err(|e| e.to_string())?;
        run.write_artifacts(dir.path()).map_err(|e| e.to_string())?;
        files.push(std::fs::read(dir.path().join("result.json")).unwrap());
        first.get_or_insert(run);
    }
    ensure(files[0] == files[1], || "result.json differs between runs".into())?;
    let run = first.unwrap();

    let all = dataset.ids();
    let cm = &run.coverage;
    ensure(cm.cover_of(&run.selected) == cm.cover_of(&all), || "final set loses coverage".into())?;

    let components: Vec<BTreeSet<InputId>> = run.reduction.components.iter().map(|c| c.inputs.clone()).collect();
    ensure(components == planted_components().to_vec(), || format!("components {components:?}"))?;

    // oracle: exact optimum over the whole initial set, no reduction involved
    let costs = dataset.costs();
    let (optimum, _) = optimal_cover(&SetSystem::full(&all, cm, &costs)).unwrap();
    let cost = total_cost(&costs, &run.selected);
    ensure(cost == optimum, || format!("final cost {cost}, optimum {optimum}"))?;
    Ok(format!(
        "{} inputs, {} blocks, 2 planted components, cost {cost} = optimum, identical result files",
        all.len(),
        cm.num_blocks()
    ))
}

fn random_tokens(rng: &mut impl Rng) -> Vec<u8> {
    let len = rng.gen_range(0..12);
    (0..len).map(|_| rng.gen_range(0..5u8)).collect()
}

fn random_url(rng: &mut impl Rng) -> Url {
    let len = rng.gen_range(1..6);
    let mut words = vec!["http".to_string()];
    words.extend((0..len).map(|_| ["a", "b", "c", "job", "view"][rng.gen_range(0..5)].to_string()));
    Url::from_words(words).unwrap()
}

fn random_params(rng: &mut impl Rng) -> Vec<Param> {
    (0..rng.gen_range(0..4))
        .map(|k| {
            if rng.gen_bool(0.5) {
                Param::int(format!("p{k}"), rng.gen_range(-50..50))
            } else {
                Param::text(format!("p{k}"), ["", "a", "ab", "abc", "xyz"][rng.gen_range(0..5)])
            }
        })
        .collect()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0006);
    for k in 0..DISTANCE_SAMPLES {
        let (a, b) = (random_tokens(&mut rng), random_tokens(&mut rng));
        let (bag, lev) = (bag_distance(&a, &b), levenshtein(&a, &b));
        ensure(bag <= lev, || format!("pair {k}: bag {bag} > lev {lev}"))?;
    }
    for k in 0..DISTANCE_SAMPLES {
        let (x, y, z) = (random_url(&mut rng), random_url(&mut rng), random_url(&mut rng));
        let (xy, yz, xz) = (url_distance(&x, &y), url_distance(&y, &z), url_distance(&x, &z));
        ensure(xz <= xy + yz, || format!("triple {k}: {xz} > {xy} + {yz}"))?;
    }
    let mut mismatched = 0;
    for k in 0..DISTANCE_SAMPLES {
        let (p, q) = (random_params(&mut rng), random_params(&mut rng));
        let d = param_distance(&p, &q);
        let matching = p.len() == q.len()
            && p.iter().zip(&q).all(|(a, b)| std::mem::discriminant(&a.value) == std::mem::discriminant(&b.value));
        ensure((0.0..=1.0).contains(&d), || format!("params {k}: {d} out of range"))?;
        ensure((d == 1.0) == !matching, || format!("params {k}: {d} with matching={matching}"))?;
        mismatched += usize::from(!matching);
    }
    Ok(format!("{DISTANCE_SAMPLES} samples each, {mismatched} non-matching parameter lists at exactly 1"))
}

fn criterion_7() -> Outcome {
    let same = a12_effect_size(&[3.0, 3.0, 3.0], &[3.0, 3.0, 3.0]).unwrap();
    let apart = a12_effect_size(&[10.0, 11.0, 12.0], &[1.0, 2.0]).unwrap();
    ensure(same == 0.5 && apart == 1.0, || format!("A12 {same} / {apart}"))?;

    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(BUNDLED_PATH);
    let dataset = load_dataset(&path).map_err(|e| e.to_string())?;
    let grid = RunConfig::default().blocks_config().unwrap().action_grid;
    for seed in 0..3 {
        let a = art_select(&dataset, &grid, seed).unwrap();
        let b = art_select(&dataset, &grid, seed).unwrap();
        ensure(a == b, || format!("ART differs for seed {seed}"))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE_0007);
    let mut instances = 0;
    for _ in 0..PROPERTY_INSTANCES {
        let (cm, costs) = random_instance(&mut rng, PROPERTY_MAX_INPUTS, PROPERTY_MAX_BLOCKS);
        let all = ids(&cm);
        let universe = cm.all_blocks();
        let seed = rng.gen();
        let n = rng.gen_range(0..=all.len());
        ensure(
            random_select(&all, n, &costs, seed).unwrap() == random_select(&all, n, &costs, seed).unwrap(),
            || "random selection not reproducible".into(),
        )?;
        let r = random_cover(&universe, &all, &cm, &costs, seed).unwrap();
        ensure(r == random_cover(&universe, &all, &cm, &costs, seed).unwrap(), || "random cover not reproducible".into())?;
        let g = greedy_cover(&universe, &all, &cm, &costs).unwrap();
        ensure(g.covers_all && cm.cover_of(&g.selected) == universe, || "greedy misses a block".into())?;
        instances += 1;
    }
    Ok(format!("A12 0.5/1.0, ART reproducible, {instances} greedy/random instances"))
}

fn main() {
    let (c3, c4) = criteria_3_and_4();
    let results: [(&str, Outcome); 7] = [
        ("worked fixtures", criterion_1()),
        ("removal and gain properties", criterion_2()),
        ("MOCCO matches the exhaustive optimum", c3),
        ("roofer and miser invariants", c4),
        ("synthetic end-to-end", criterion_5()),
        ("distance properties", criterion_6()),
        ("baseline sanity", criterion_7()),
    ];
    let mut failed = 0;
    for (k, (name, outcome)) in results.iter().enumerate() {
        match outcome {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
