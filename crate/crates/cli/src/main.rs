//! `consim`: single runs, experiment sweeps, analyses and graph diagnostics.

mod analyze;
mod config;

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use consim_core::experiments::{
    build_experiment_from, save_records_csv, save_summary_csv, SweepSpec, DEFAULT_REPLICATIONS,
};
use consim_core::network::{clustering_coefficient, connected_components, mean_path_length};
use consim_core::{run_sweep, save_json, summarize, ExperimentId, Simulation};
use serde::Serialize;

use crate::config::CliConfig;

#[derive(Parser)]
#[command(
    name = "consim",
    version,
    about = "Conspiracy diffusion simulator with bad, good and correcting bots"
)]
struct Cli {
    /// JSON config: simulation parameters plus experiment, replications,
    /// base_seed, jobs and out.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Simulation seed for `run` and `graph-stats`, base seed for `sweep`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Print nothing but errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write outcome.json.
    Run {
        /// Also write the per-tick series to series.csv.
        #[arg(long)]
        series: bool,
    },
    /// Run a named experiment and write runs.csv, summary.csv and sweep.json.
    Sweep {
        /// 1-5 or `threshold`.
        #[arg(long, short, conflicts_with = "spec")]
        experiment: Option<String>,
        #[arg(long, short)]
        replications: Option<usize>,
        /// Run a fully expanded sweep described in JSON instead.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Statistical analyses of sweep output.
    #[command(subcommand)]
    Analyze(analyze::AnalyzeCommand),
    /// Build the configured network and report its structure.
    GraphStats {
        /// Also write the edge list to edges.csv.
        #[arg(long)]
        edges: bool,
    },
}

pub struct Ctx {
    pub config: CliConfig,
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

impl Ctx {
    pub fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    /// The output directory, created on first use.
    pub fn out_dir(&self, default: &str) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from(default));
        fs::create_dir_all(&dir).with_context(|| format!("cannot create output directory {}", dir.display()))?;
        Ok(dir)
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let mut config = CliConfig::load(cli.config.as_deref())?;
    let out = cli.out.or_else(|| config.sweep.out.take());
    let jobs = cli
        .jobs
        .or(config.sweep.jobs)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let ctx = Ctx {
        config,
        out,
        quiet: cli.quiet,
    };
    match cli.command {
        Command::Run { series } => cmd_run(&ctx, cli.seed, series),
        Command::Sweep {
            experiment,
            replications,
            spec,
        } => cmd_sweep(&ctx, experiment, replications, spec.as_deref(), cli.seed, jobs),
        Command::Analyze(cmd) => analyze::run(&ctx, cmd),
        Command::GraphStats { edges } => cmd_graph_stats(&ctx, cli.seed, edges),
    }
}

fn cmd_run(ctx: &Ctx, seed: Option<u64>, series: bool) -> Result<()> {
    let mut params = ctx.config.sim.clone();
    if let Some(s) = seed {
        params.seed = s;
    }
    let sim = Simulation::new(params.clone())?;
    let dir = ctx.out_dir("out")?;
    let outcome = if series {
        let (outcome, ticks) = sim.run_with_series();
        consim_core::engine::save_time_series(&dir.join("series.csv"), &ticks)?;
        outcome
    } else {
        sim.run_to_completion()
    };
    #[derive(Serialize)]
    struct Report<'a> {
        params: &'a consim_core::SimParams,
        outcome: consim_core::RunOutcome,
    }
    save_json(
        &dir.join("outcome.json"),
        &Report {
            params: &params,
            outcome,
        },
    )?;
    let tick = |t: Option<u64>| t.map_or("none".to_string(), |t| t.to_string());
    ctx.say(format!("bad_majority_tick: {}", tick(outcome.bad_majority_tick)));
    ctx.say(format!("all_bad_tick: {}", tick(outcome.all_bad_tick)));
    Ok(())
}

fn cmd_sweep(
    ctx: &Ctx,
    experiment: Option<String>,
    replications: Option<usize>,
    spec_path: Option<&Path>,
    seed: Option<u64>,
    jobs: usize,
) -> Result<()> {
    let settings = &ctx.config.sweep;
    let mut spec: SweepSpec = match spec_path {
        Some(p) => serde_json::from_str(
            &fs::read_to_string(p).with_context(|| format!("cannot read sweep spec {}", p.display()))?,
        )
        .with_context(|| format!("invalid sweep spec {}", p.display()))?,
        None => {
            let id = experiment
                .or_else(|| settings.experiment.clone())
                .context("no experiment given; pass --experiment or set `experiment` in the config")?;
            let id: ExperimentId = id.parse()?;
            let mut spec = build_experiment_from(id, &ctx.config.sim);
            spec.replications = settings.replications.unwrap_or(DEFAULT_REPLICATIONS);
            spec.base_seed = settings.base_seed.unwrap_or(0);
            spec
        }
    };
    if let Some(r) = replications {
        spec.replications = r;
    }
    if let Some(s) = seed {
        spec.base_seed = s;
    }
    spec.validate()?;
    let dir = ctx.out_dir("out")?;
    ctx.say(format!(
        "experiment {}: {} conditions, {} runs",
        spec.experiment_id,
        spec.conditions.len(),
        spec.total_runs()
    ));
    if let Some(note) = &spec.note {
        ctx.say(format!("note: {note}"));
    }
    let records = run_sweep(&spec, jobs)?;
    save_records_csv(&dir.join("runs.csv"), &records)?;
    save_summary_csv(&dir.join("summary.csv"), &summarize(&records)?)?;
    save_json(&dir.join("sweep.json"), &spec)?;
    ctx.say(format!(
        "wrote {} records to {}",
        records.len(),
        dir.join("runs.csv").display()
    ));
    Ok(())
}

fn cmd_graph_stats(ctx: &Ctx, seed: Option<u64>, edges: bool) -> Result<()> {
    let mut params = ctx.config.sim.clone();
    if let Some(s) = seed {
        params.seed = s;
    }
    let sim = Simulation::new(params)?;
    let net = sim.network();
    let n = net.node_count();
    let components = connected_components(net);
    #[derive(Serialize)]
    struct GraphStats {
        nodes: usize,
        edges: usize,
        mean_degree: f64,
        clustering: f64,
        mean_path_length: f64,
        components: usize,
        largest_component: usize,
    }
    let stats = GraphStats {
        nodes: n,
        edges: net.edge_count(),
        mean_degree: 2.0 * net.edge_count() as f64 / n as f64,
        clustering: clustering_coefficient(net),
        mean_path_length: mean_path_length(net)?,
        components: components.len(),
        largest_component: components.first().map_or(0, Vec::len),
    };
    ctx.say(format!("nodes              {}", stats.nodes));
    ctx.say(format!("edges              {}", stats.edges));
    ctx.say(format!(
        "mean degree        {}",
        consim_core::fmt::sig6(stats.mean_degree)
    ));
    ctx.say(format!(
        "clustering         {}",
        consim_core::fmt::sig6(stats.clustering)
    ));
    ctx.say(format!(
        "mean path length   {}",
        consim_core::fmt::sig6(stats.mean_path_length)
    ));
    ctx.say(format!(
        "components         {} (largest {})",
        stats.components, stats.largest_component
    ));
    if ctx.out.is_some() || edges {
        let dir = ctx.out_dir("out")?;
        save_json(&dir.join("graph.json"), &stats)?;
        if edges {
            net.save_edge_list(&dir.join("edges.csv"))?;
        }
    }
    Ok(())
}
