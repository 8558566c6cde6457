use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use covmin::blocks::build_blocks;
use covmin::dataset::{load_dataset, Dataset};
use covmin::harness::{bench, oracle, run_pipeline, Algorithm, HarnessError, RunConfig};
use covmin::reduction::reduce_problem;
use covmin::total_cost;

#[derive(Parser)]
#[command(name = "covmin", version, about = "Coverage-preserving minimization of Web test inputs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a dataset and report input costs.
    Ingest(Common),
    /// Build input blocks and write coverage.json.
    Cluster(Common),
    /// Build blocks, reduce, and write coverage.json and reduction.json.
    Reduce(Common),
    /// Run the whole pipeline and write all artifacts.
    Minimize(Common),
    /// Compare algorithms over repeated runs.
    Bench(BenchArgs),
    /// Exact optimum of the reduced problem.
    Oracle(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    dataset: PathBuf,
    /// JSON run configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    /// Comma-separated list of mocco, greedy, random, art, exhaustive.
    #[arg(long, value_delimiter = ',', default_value = "mocco,greedy,random")]
    algo: Vec<String>,
    /// Overrides the repetitions of the configuration.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

struct Loaded {
    dataset: Dataset,
    cfg: RunConfig,
    seed: u64,
    out: PathBuf,
}

fn load(c: &Common) -> Result<Loaded, HarnessError> {
    let cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let dataset = load_dataset(&c.dataset)?;
    let seed = c.seed.unwrap_or(cfg.seed);
    Ok(Loaded { dataset, cfg, seed, out: c.out.clone() })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), HarnessError> {
    let io = |source| HarnessError::Io { path: dir.join(name).display().to_string(), source };
    std::fs::create_dir_all(dir).map_err(io)?;
    std::fs::write(dir.join(name), contents).map_err(io)
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json value serializes")
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Ingest(c) => {
            let l = load(&c)?;
            let costs = l.dataset.costs();
            let summary = json!({
                "inputs": l.dataset.inputs.len(),
                "dropped": l.dataset.dropped,
                "total_cost": total_cost(&costs, costs.keys()),
                "costs": costs.iter().map(|(id, c)| (id.0.to_string(), json!(c))).collect::<serde_json::Map<_, _>>(),
            });
            write(&l.out, "ingest.json", &pretty(&summary))?;
            println!("{} inputs ({} dropped), total cost {}", summary["inputs"], l.dataset.dropped.len(), summary["total_cost"]);
        }
        Command::Cluster(c) => {
            let l = load(&c)?;
            let blocks = build_blocks(&l.dataset, &l.cfg.blocks_config()?, l.seed)?;
            write(&l.out, "coverage.json", &blocks.coverage.to_json())?;
            println!(
                "{} output classes, {} blocks",
                blocks.output_classes.num_classes,
                blocks.coverage.num_blocks()
            );
        }
        Command::Reduce(c) => {
            let l = load(&c)?;
            let blocks = build_blocks(&l.dataset, &l.cfg.blocks_config()?, l.seed)?;
            let cm = blocks.coverage;
            let reduction = reduce_problem(&l.dataset.ids(), &cm, &l.dataset.costs(), l.cfg.reduction_params());
            write(&l.out, "coverage.json", &cm.to_json())?;
            write(&l.out, "reduction.json", &reduction.to_json(&cm))?;
            println!(
                "{} necessary, {} component(s), {} iteration(s)",
                reduction.necessary.len(),
                reduction.components.len(),
                reduction.iterations
            );
        }
        Command::Minimize(c) => {
            let l = load(&c)?;
            let run = run_pipeline(&l.dataset, &l.cfg, l.seed)?;
            run.write_artifacts(&l.out)?;
            let r = &run.result;
            println!(
                "{}: {} of {} inputs, cost {} of {}",
                r.config,
                r.selected.len(),
                r.num_inputs,
                r.total_cost,
                r.initial_cost
            );
        }
        Command::Bench(b) => {
            let l = load(&b.common)?;
            let algorithms = b.algo.iter().map(|a| a.parse()).collect::<Result<Vec<Algorithm>, _>>()?;
            let reps = b.reps.unwrap_or(l.cfg.repetitions);
            let report = bench(&l.dataset, &l.cfg, &algorithms, reps, l.seed, b.jobs)?;
            std::fs::create_dir_all(&l.out)
                .map_err(|source| HarnessError::Io { path: l.out.display().to_string(), source })?;
            report.write(&l.out.join("bench.json"), &l.out.join("bench.csv"))?;
            for p in &report.a12 {
                println!("A12({}, {}) = {:.3}", p.a, p.b, p.a12);
            }
        }
        Command::Oracle(c) => {
            let l = load(&c)?;
            let blocks = build_blocks(&l.dataset, &l.cfg.blocks_config()?, l.seed)?;
            let costs = l.dataset.costs();
            let reduction = reduce_problem(&l.dataset.ids(), &blocks.coverage, &costs, l.cfg.reduction_params());
            let best = oracle(&reduction, &blocks.coverage, &costs)?;
            write(&l.out, "oracle.json", &serde_json::to_string_pretty(&best).expect("oracle serializes"))?;
            println!("optimum cost {}", best.total_cost);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
