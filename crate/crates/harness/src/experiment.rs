//! Multi-seed training sweeps, checkpoint evaluation and the heuristic
//! baseline report.
//!
//! Output layout under `out_dir`:
//!
//! ```text
//! seed_<s>.csv                   metrics, one row per iteration
//! seed_<s>_updates.csv           trust-region and value-fit diagnostics
//! aggregate.csv                  mean/std across seeds per iteration
//! checkpoints/seed_<s>_iter_<i>.ckpt
//! ```
//!
//! Seeds run one after another and share nothing but the output directory.
//! The aggregate is written once every seed has finished.

use std::path::{Path, PathBuf};

use uavbs_core::baseline::{heuristic_rate, HeuristicPlacement};
use uavbs_core::rng::SeedStreams;
use uavbs_core::trpo::{summarize, IterationReport, ACTION_DIM};
use uavbs_core::{MetricsRow, Trainer, World};

use crate::checkpoint::{layer_table, Checkpoint};
use crate::metrics_io::{self, AggregateRow};
use crate::{HarnessError, RunConfig};

#[derive(Debug, Clone)]
pub struct SeedResult {
    pub seed: u64,
    pub history: Vec<IterationReport>,
    pub metrics_path: PathBuf,
}

impl SeedResult {
    pub fn metrics(&self) -> Vec<MetricsRow> {
        self.history.iter().map(|r| r.metrics).collect()
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub seeds: Vec<SeedResult>,
    pub aggregate: Vec<AggregateRow>,
    pub aggregate_path: PathBuf,
}

pub fn seed_metrics_path(out_dir: &Path, seed: u64) -> PathBuf {
    out_dir.join(format!("seed_{seed}.csv"))
}

pub fn checkpoint_path(out_dir: &Path, seed: u64, iteration: usize) -> PathBuf {
    out_dir.join("checkpoints").join(format!("seed_{seed}_iter_{iteration:06}.ckpt"))
}

pub fn checkpoint_of(trainer: &Trainer) -> Checkpoint {
    let policy = trainer.policy();
    let value = trainer.value();
    Checkpoint {
        obs_dim: policy.obs_dim() as u32,
        action_dim: policy.action_dim() as u32,
        policy_layers: layer_table(policy.net()),
        value_layers: layer_table(value.net()),
        iteration: trainer.iteration() as u64,
        seed: trainer.seed(),
        policy: policy.params().to_vec(),
        value: value.params().to_vec(),
    }
}

fn new_trainer(cfg: &RunConfig, seed: u64) -> Result<Trainer, HarnessError> {
    Ok(Trainer::new(cfg.world.clone(), cfg.trpo.clone(), seed)?.with_heuristic_draws(cfg.heuristic_draws))
}

/// Trains one seed for `cfg.trpo.iterations` iterations, writing its
/// metrics, update log and checkpoints.
pub fn run_seed(cfg: &RunConfig, seed: u64) -> Result<SeedResult, HarnessError> {
    let out = &cfg.out_dir;
    std::fs::create_dir_all(out.join("checkpoints"))?;
    let mut trainer = new_trainer(cfg, seed)?;
    checkpoint_of(&trainer).save(&checkpoint_path(out, seed, 0))?;

    let every = cfg.checkpoint_every;
    let mut save_err = None;
    let history = trainer.train(cfg.trpo.iterations, |t, _| {
        let it = t.iteration();
        if save_err.is_none() && every > 0 && it % every == 0 {
            save_err = checkpoint_of(t).save(&checkpoint_path(out, seed, it)).err();
        }
    })?;
    if let Some(e) = save_err {
        return Err(e);
    }
    if trainer.iteration() > 0 {
        checkpoint_of(&trainer).save(&checkpoint_path(out, seed, trainer.iteration()))?;
    }

    let metrics: Vec<MetricsRow> = history.iter().map(|r| r.metrics).collect();
    let metrics_path = seed_metrics_path(out, seed);
    metrics_io::write_metrics(&metrics_path, &metrics)?;
    metrics_io::write_updates(&out.join(format!("seed_{seed}_updates.csv")), &history)?;
    Ok(SeedResult { seed, history, metrics_path })
}

/// Runs every seed of the sweep and writes the cross-seed aggregate.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentResult, HarnessError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut seeds = Vec::with_capacity(cfg.num_seeds);
    for seed in cfg.seeds() {
        log::info!("training seed {seed} for {} iterations", cfg.trpo.iterations);
        seeds.push(run_seed(cfg, seed)?);
    }
    let per_seed: Vec<Vec<MetricsRow>> = seeds.iter().map(SeedResult::metrics).collect();
    let aggregate = metrics_io::aggregate(&per_seed)?;
    let aggregate_path = cfg.out_dir.join("aggregate.csv");
    metrics_io::write_aggregate(&aggregate_path, &aggregate)?;
    Ok(ExperimentResult { seeds, aggregate, aggregate_path })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub seed: u64,
    pub checkpoint_iteration: u64,
    pub episodes: usize,
    pub metrics: MetricsRow,
    /// Mean total downlink rate per step of the agent, bits/s.
    pub agent_mean_rate: f64,
    /// Mean of the per-episode heuristic rates, bits/s.
    pub heuristic_mean_rate: f64,
    pub delta_r: f64,
    /// Total downlink rate of every evaluated step.
    pub step_rates: Vec<f64>,
    /// Heuristic mean rate for the user drop of every episode.
    pub heuristic_rates: Vec<f64>,
}

/// Rolls out the checkpointed policy (stochastic actions, as in training)
/// for `episodes` full episodes and compares its rate with the heuristic
/// placement on the same user drops.
pub fn evaluate(ckpt: &Checkpoint, cfg: &RunConfig, episodes: usize, seed: u64) -> Result<EvalReport, HarnessError> {
    cfg.validate()?;
    if episodes == 0 {
        return Err(HarnessError::Config("episodes must be at least 1".into()));
    }
    let mut trainer = new_trainer(cfg, seed)?;
    ckpt.check_compatible(trainer.policy().net(), trainer.value().net(), ACTION_DIM)?;
    let iteration = usize::try_from(ckpt.iteration).map_err(|_| HarnessError::Checkpoint("iteration overflow".into()))?;
    trainer.restore(ckpt.policy.clone(), ckpt.value.clone(), iteration)?;

    let batch = trainer.collect_batch(episodes * cfg.world.horizon)?;
    let heuristic_rates = trainer.heuristic_rates(&batch)?;
    let metrics = summarize(iteration, &batch, &heuristic_rates)?;
    let step_rates: Vec<f64> = batch.records.iter().map(|r| r.sum_rate).collect();
    let agent_mean_rate = step_rates.iter().sum::<f64>() / step_rates.len() as f64;
    let heuristic_mean_rate = heuristic_rates.iter().sum::<f64>() / heuristic_rates.len() as f64;
    Ok(EvalReport {
        seed,
        checkpoint_iteration: ckpt.iteration,
        episodes,
        delta_r: metrics.delta_r,
        metrics,
        agent_mean_rate,
        heuristic_mean_rate,
        step_rates,
        heuristic_rates,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineDrop {
    pub users: Vec<[f64; 2]>,
    pub placement: HeuristicPlacement,
    pub mean_rate: f64,
}

/// Heuristic placement and mean rate for `drops` independent user drops.
pub fn baseline_report(cfg: &RunConfig, drops: usize, seed: u64) -> Result<Vec<BaselineDrop>, HarnessError> {
    cfg.validate()?;
    let world = World::new(cfg.world.clone()).map_err(uavbs_core::trpo::TrpoError::from)?;
    let mut s = SeedStreams::new(seed);
    (0..drops)
        .map(|_| {
            let (state, _) = world.reset(&mut s.geometry, &mut s.channel);
            let (placement, mean_rate) = heuristic_rate(&world, &state.users_xy, cfg.heuristic_draws, &mut s.heuristic)?;
            Ok(BaselineDrop { users: state.users_xy, placement, mean_rate })
        })
        .collect()
}
