use alloc::vec::Vec;

use crate::baseline;
use crate::metrics::MetricsRow;
use crate::nn::linalg::{dot, norm};
use crate::nn::MlpSpec;
use crate::rng::SeedStreams;
use crate::trpo::batch::{collect, Batch, CollectRngs};
use crate::trpo::cg::conjugate_gradient;
use crate::trpo::gae::{compute_returns_and_gae, normalize_advantages};
use crate::trpo::policy::{Policy, ValueFunction};
use crate::trpo::update::{line_search, policy_gradient, LineSearchOutcome};
use crate::trpo::value::{update_value, Adam, ValueFit};
use crate::trpo::{TrpoConfig, TrpoError};
use crate::world::{World, WorldConfig};

/// Action dimension: speed, azimuth, polar angle.
pub const ACTION_DIM: usize = 3;

/// Channel draws per episode used for the heuristic reference rate.
pub const DEFAULT_HEURISTIC_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateStatus {
    Accepted,
    /// No backtracked step met the KL bound with positive improvement.
    Rejected,
    /// Non-finite gradient or CG breakdown; the policy was left alone.
    Skipped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateStats {
    pub status: UpdateStatus,
    pub kl: f64,
    pub improvement: f64,
    pub backtracks: usize,
    pub step_norm: f64,
    pub grad_norm: f64,
    pub cg_iterations: usize,
    /// `||F x - g|| / ||g||` for the CG solution (0 when `g = 0`).
    pub cg_residual_rel: f64,
}

impl UpdateStats {
    fn idle(status: UpdateStatus, grad_norm: f64) -> Self {
        Self {
            status,
            kl: 0.0,
            improvement: 0.0,
            backtracks: 0,
            step_norm: 0.0,
            grad_norm,
            cg_iterations: 0,
            cg_residual_rel: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationReport {
    pub metrics: MetricsRow,
    pub update: UpdateStats,
    pub value: ValueFit,
}

/// Aggregates a collected batch into a metrics row. `heuristic_rates` holds
/// the heuristic mean total rate of every episode in the batch.
pub fn summarize(iteration: usize, batch: &Batch, heuristic_rates: &[f64]) -> Result<MetricsRow, TrpoError> {
    let n = batch.len().max(1) as f64;
    let mean = |f: &dyn Fn(&crate::trpo::StepRecord) -> f64| batch.records.iter().map(f).sum::<f64>() / n;
    let agent_rate = mean(&|r| r.sum_rate);
    let heuristic = heuristic_rates.iter().sum::<f64>() / heuristic_rates.len().max(1) as f64;
    Ok(MetricsRow {
        iteration,
        avg_reward: batch.rewards.iter().sum::<f64>() / n,
        avg_speed_violation: mean(&|r| f64::from(u8::from(r.speed_violation))),
        avg_boundary_violation: mean(&|r| f64::from(u8::from(r.boundary_violation))),
        avg_log_sum_rss_snr: mean(&|r| libm::log10(r.sum_rss_snr)),
        avg_speed: mean(&|r| r.speed),
        avg_height: mean(&|r| r.height),
        avg_dist_to_cluster: mean(&|r| r.dist_to_cluster),
        delta_r: baseline::rate_ratio(agent_rate, heuristic)?,
    })
}

/// Runs TRPO iterations for one seed.
#[derive(Debug, Clone)]
pub struct Trainer {
    world: World,
    cfg: TrpoConfig,
    policy: Policy,
    value: ValueFunction,
    value_opt: Adam,
    streams: SeedStreams,
    iteration: usize,
    heuristic_draws: usize,
}

impl Trainer {
    pub fn new(world_cfg: WorldConfig, cfg: TrpoConfig, seed: u64) -> Result<Self, TrpoError> {
        cfg.validate()?;
        let world = World::new(world_cfg)?;
        let c = world.config();
        let k = c.num_users;
        let mut streams = SeedStreams::new(seed);
        let mut policy = Policy::new(MlpSpec::policy(k, ACTION_DIM));
        let mid = [
            0.5 * (c.v_min + c.v_max),
            core::f64::consts::PI,
            core::f64::consts::FRAC_PI_2,
        ];
        policy.init(&mut streams.init, &mid);
        let mut value = ValueFunction::new(MlpSpec::value(k));
        value.init(&mut streams.init);
        let value_opt = Adam::new(value.net().num_params(), cfg.value_lr);
        Ok(Self {
            world,
            cfg,
            policy,
            value,
            value_opt,
            streams,
            iteration: 0,
            heuristic_draws: DEFAULT_HEURISTIC_DRAWS,
        })
    }

    pub fn with_heuristic_draws(mut self, draws: usize) -> Self {
        self.heuristic_draws = draws.max(1);
        self
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn config(&self) -> &TrpoConfig {
        &self.cfg
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn value(&self) -> &ValueFunction {
        &self.value
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    pub fn seed(&self) -> u64 {
        self.streams.seed
    }

    /// Replaces network parameters, e.g. from a checkpoint.
    pub fn restore(&mut self, policy: Vec<f64>, value: Vec<f64>, iteration: usize) -> Result<(), TrpoError> {
        self.policy.set_params(policy)?;
        self.value.set_params(value)?;
        self.iteration = iteration;
        Ok(())
    }

    pub fn collect_batch(&mut self, n: usize) -> Result<Batch, TrpoError> {
        let rngs = CollectRngs {
            geometry: &mut self.streams.geometry,
            channel: &mut self.streams.channel,
            actions: &mut self.streams.actions,
        };
        collect(&self.policy, &self.world, n, rngs)
    }

    pub fn heuristic_rates(&mut self, batch: &Batch) -> Result<Vec<f64>, TrpoError> {
        batch
            .episode_users
            .iter()
            .map(|users| {
                baseline::heuristic_rate(&self.world, users, self.heuristic_draws, &mut self.streams.heuristic)
                    .map(|(_, rate)| rate)
                    .map_err(TrpoError::from)
            })
            .collect()
    }

    /// Fills `returns` and normalized `advantages` using the current value net.
    pub fn estimate_advantages(&self, batch: &mut Batch) -> Result<(), TrpoError> {
        let n = batch.len();
        let values = self.value.predict(&batch.states, n)?;
        let next_values = self.value.predict(&batch.next_states, n)?;
        let (returns, mut adv) = compute_returns_and_gae(
            &batch.rewards,
            &batch.dones,
            &values,
            &next_values,
            self.cfg.gamma,
            self.cfg.gae_lambda,
        );
        normalize_advantages(&mut adv);
        batch.returns = returns;
        batch.advantages = adv;
        Ok(())
    }

    /// Natural-gradient step with line search. Leaves the policy untouched
    /// unless a step is accepted.
    pub fn update_policy(&mut self, batch: &Batch) -> Result<UpdateStats, TrpoError> {
        let n = batch.len();
        let eval = self.policy.evaluate(&batch.states, n)?;
        let g = policy_gradient(&self.policy, &eval, batch)?;
        let g_norm = norm(&g);
        if !g_norm.is_finite() {
            log::warn!("iteration {}: non-finite policy gradient, skipping update", self.iteration);
            return Ok(UpdateStats::idle(UpdateStatus::Skipped, g_norm));
        }
        if g_norm == 0.0 {
            return Ok(UpdateStats::idle(UpdateStatus::Rejected, 0.0));
        }
        let damping = self.cfg.cg_damping;
        let policy = &self.policy;
        let mut fvp_err = None;
        let cg = conjugate_gradient(
            |v| match policy.fisher_vector_product(&eval, v, damping) {
                Ok(out) => out,
                Err(e) => {
                    fvp_err = Some(e);
                    alloc::vec![0.0; v.len()]
                }
            },
            &g,
            self.cfg.cg_iters,
            self.cfg.cg_tol,
        );
        if let Some(e) = fvp_err {
            return Err(e.into());
        }
        let fx = self.policy.fisher_vector_product(&eval, &cg.x, damping)?;
        let residual: Vec<f64> = fx.iter().zip(&g).map(|(a, b)| a - b).collect();
        let cg_residual_rel = norm(&residual) / g_norm;
        let x_fx = dot(&cg.x, &fx);
        if cg.breakdown || !x_fx.is_finite() {
            log::warn!("iteration {}: conjugate gradient breakdown, skipping update", self.iteration);
            let mut stats = UpdateStats::idle(UpdateStatus::Skipped, g_norm);
            stats.cg_iterations = cg.iterations;
            stats.cg_residual_rel = cg_residual_rel;
            return Ok(stats);
        }
        let outcome = line_search(&self.policy, &eval, batch, &cg.x, x_fx, &self.cfg)?;
        let mut stats = UpdateStats {
            cg_iterations: cg.iterations,
            cg_residual_rel,
            ..UpdateStats::idle(UpdateStatus::Rejected, g_norm)
        };
        match outcome {
            LineSearchOutcome::Accepted(step) => {
                stats.status = UpdateStatus::Accepted;
                stats.kl = step.kl;
                stats.improvement = step.improvement;
                stats.backtracks = step.backtracks;
                stats.step_norm = step.step_norm;
                self.policy.set_params(step.params)?;
            }
            LineSearchOutcome::Rejected { attempts } => {
                log::debug!("iteration {}: line search rejected after {attempts} attempts", self.iteration);
            }
        }
        Ok(stats)
    }

    pub fn update_value(&mut self, batch: &Batch) -> Result<ValueFit, TrpoError> {
        Ok(update_value(
            &mut self.value,
            &mut self.value_opt,
            &batch.states,
            &batch.returns,
            &self.cfg,
            &mut self.streams.shuffle,
        )?)
    }

    /// One full iteration: collect, estimate, update policy, fit value.
    pub fn step(&mut self) -> Result<IterationReport, TrpoError> {
        let mut batch = self.collect_batch(self.cfg.batch_size)?;
        let heuristic = self.heuristic_rates(&batch)?;
        let metrics = summarize(self.iteration, &batch, &heuristic)?;
        self.estimate_advantages(&mut batch)?;
        let update = self.update_policy(&batch)?;
        let value = self.update_value(&batch)?;
        log::info!(
            "seed {} iter {}: reward {:.3} kl {:.4} status {:?} delta_r {:.3}",
            self.streams.seed,
            self.iteration,
            metrics.avg_reward,
            update.kl,
            update.status,
            metrics.delta_r
        );
        self.iteration += 1;
        Ok(IterationReport { metrics, update, value })
    }

    /// Runs `iterations` steps, handing each report to `on_report`.
    pub fn train<F>(&mut self, iterations: usize, mut on_report: F) -> Result<Vec<IterationReport>, TrpoError>
    where
        F: FnMut(&Trainer, &IterationReport),
    {
        let mut history = Vec::with_capacity(iterations);
        for _ in 0..iterations {
            let report = self.step()?;
            on_report(self, &report);
            history.push(report);
        }
        Ok(history)
    }
}
