use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use uavbs_harness::config::{parse_env, parse_reward};
use uavbs_harness::experiment::baseline_report;
use uavbs_harness::{evaluate, run_experiment, Checkpoint, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "uavbs", version, about = "Train and evaluate a UAV base-station placement policy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train every seed of the sweep and write metrics, checkpoints and the aggregate.
    Train {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Roll out a checkpointed policy and compare it with the heuristic placement.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 10)]
        episodes: usize,
    },
    /// Print the heuristic placement and its mean rate for random user drops.
    Baseline {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1)]
        drops: usize,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// Flat TOML file with RunConfig keys; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// highrise, denseurban, urban or suburban.
    #[arg(long)]
    env: Option<String>,
    /// r1 or r2.
    #[arg(long)]
    reward: Option<String>,
    /// Number of seeds in the sweep.
    #[arg(long)]
    seeds: Option<usize>,
    /// Training iterations per seed.
    #[arg(long)]
    iters: Option<usize>,
    /// Transitions per iteration.
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(env) = &self.env {
            cfg.world.env_preset = parse_env(env)?;
        }
        if let Some(reward) = &self.reward {
            cfg.world.reward_variant = parse_reward(reward)?;
        }
        if let Some(n) = self.seeds {
            cfg.num_seeds = n;
        }
        if let Some(n) = self.iters {
            cfg.trpo.iterations = n;
        }
        if let Some(n) = self.batch {
            cfg.trpo.batch_size = n;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Train { common } => {
            let cfg = common.resolve()?;
            let result = run_experiment(&cfg)?;
            for s in &result.seeds {
                if let Some(last) = s.history.last() {
                    println!(
                        "seed {}: {} iterations, final reward {:.4}, delta_r {:.4}",
                        s.seed,
                        s.history.len(),
                        last.metrics.avg_reward,
                        last.metrics.delta_r
                    );
                }
            }
            println!("aggregate written to {}", result.aggregate_path.display());
        }
        Command::Evaluate { common, checkpoint, episodes } => {
            let cfg = common.resolve()?;
            let ckpt = Checkpoint::load(&checkpoint)?;
            let r = evaluate(&ckpt, &cfg, episodes, cfg.seed)?;
            println!("checkpoint iteration {} seed {} episodes {}", r.checkpoint_iteration, r.seed, r.episodes);
            println!("agent mean rate      {:.6e} bit/s", r.agent_mean_rate);
            println!("heuristic mean rate  {:.6e} bit/s", r.heuristic_mean_rate);
            println!("delta_r              {:.6}", r.delta_r);
            println!("avg reward           {:.6}", r.metrics.avg_reward);
            println!("speed violation      {:.6}", r.metrics.avg_speed_violation);
            println!("boundary violation   {:.6}", r.metrics.avg_boundary_violation);
            println!("avg height           {:.3} m", r.metrics.avg_height);
        }
        Command::Baseline { common, drops } => {
            let cfg = common.resolve()?;
            for (i, d) in baseline_report(&cfg, drops, cfg.seed)?.iter().enumerate() {
                let [x, y, h] = d.placement.position;
                println!(
                    "drop {i}: placement ({x:.3}, {y:.3}, {h:.3}) required height {:.3} shortfall {} mean rate {:.6e} bit/s",
                    d.placement.required_height, d.placement.shortfall, d.mean_rate
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
