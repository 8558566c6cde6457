use covmin::clustering::ClusterAlgo;
use covmin::distance::OutputMetric;
use covmin::harness::synthetic::{synthetic_dataset, PLANTED_OPTIMUM};
use covmin::harness::{bench, run_pipeline, Algorithm, RunConfig};
use covmin::total_cost;

fn config(metric: OutputMetric, outputs: ClusterAlgo, actions: ClusterAlgo) -> RunConfig {
    RunConfig { output_metric: metric, output_algo: outputs, action_algo: actions, ..RunConfig::default() }
}

#[test]
fn every_configuration_preserves_coverage() {
    let d = synthetic_dataset();
    let all = d.ids();
    for metric in [OutputMetric::Lev, OutputMetric::Bag] {
        for outputs in [ClusterAlgo::Kmeans, ClusterAlgo::Dbscan] {
            for actions in [ClusterAlgo::Kmeans, ClusterAlgo::Dbscan] {
                let cfg = config(metric, outputs, actions);
                let run = run_pipeline(&d, &cfg, 5).unwrap();
                let cm = &run.coverage;
                assert_eq!(cm.cover_of(&run.selected), cm.cover_of(&all), "{}", cfg.label());
                assert!(run.result.covers_all);
                assert!(run.result.total_cost <= run.result.initial_cost);
                assert_eq!(run.result.total_cost, total_cost(&d.costs(), &run.selected));
                assert_eq!(run.result.config, cfg.label());
            }
        }
    }
}

#[test]
fn dbscan_configurations_hit_the_planted_optimum() {
    let d = synthetic_dataset();
    for metric in [OutputMetric::Lev, OutputMetric::Bag] {
        let run = run_pipeline(&d, &config(metric, ClusterAlgo::Dbscan, ClusterAlgo::Dbscan), 2).unwrap();
        assert_eq!(run.result.total_cost, PLANTED_OPTIMUM);
    }
}

#[test]
fn same_seed_same_result() {
    let d = synthetic_dataset();
    let cfg = config(OutputMetric::Lev, ClusterAlgo::Kmeans, ClusterAlgo::Kmeans);
    let a = run_pipeline(&d, &cfg, 11).unwrap();
    let b = run_pipeline(&d, &cfg, 11).unwrap();
    assert_eq!(a.result.to_json(), b.result.to_json());
    assert_eq!(a.coverage.to_json(), b.coverage.to_json());
    assert_eq!(a.reduction.to_json(&a.coverage), b.reduction.to_json(&b.coverage));
}

#[test]
fn bench_rows_and_reproducibility() {
    let d = synthetic_dataset();
    let cfg = RunConfig::default();
    let algos = [Algorithm::Mocco, Algorithm::Greedy, Algorithm::Random, Algorithm::Art, Algorithm::Exhaustive];
    let a = bench(&d, &cfg, &algos, 3, 4, 1).unwrap();
    let b = bench(&d, &cfg, &algos, 3, 4, 3).unwrap();
    assert_eq!(a.rows.len(), 15);
    assert_eq!(a.a12.len(), 20);
    assert_eq!(a.without_runtimes(), b.without_runtimes());
    for row in &a.rows {
        match row.algorithm {
            Algorithm::Mocco | Algorithm::Exhaustive => assert_eq!(row.cost, PLANTED_OPTIMUM),
            Algorithm::Greedy | Algorithm::Random => assert!(row.cost >= PLANTED_OPTIMUM && row.covers_all),
            Algorithm::Art => assert!(row.vdr.is_some()),
        }
    }
    let mocco_vs_exhaustive =
        a.a12.iter().find(|p| p.a == Algorithm::Mocco && p.b == Algorithm::Exhaustive).unwrap();
    assert_eq!(mocco_vs_exhaustive.a12, 0.5);
}
