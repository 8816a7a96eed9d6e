//! Run configuration and its flat TOML file form.
//!
//! Every key is optional and top-level; keys mirror the field names of
//! `WorldConfig`, `TrpoConfig` and [`RunConfig`]. Unknown keys are errors.
//!
//! ```toml
//! env_preset = "suburban"
//! reward_variant = "r1"
//! num_users = 5
//! horizon = 200
//! batch_size = 2000
//! iterations = 30
//! seed = 0
//! num_seeds = 6
//! out_dir = "runs/suburban"
//! ```

use std::path::{Path, PathBuf};

use serde::Deserialize;
use uavbs_core::rng::sweep_seed;
use uavbs_core::{EnvPreset, RewardVariant, TrpoConfig, WorldConfig};

use crate::HarnessError;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub world: WorldConfig,
    pub trpo: TrpoConfig,
    /// Master seed; run `i` uses `seed + 1000 * i`.
    pub seed: u64,
    pub num_seeds: usize,
    pub out_dir: PathBuf,
    /// Checkpoint every this many iterations; 0 keeps only the initial and
    /// final checkpoints.
    pub checkpoint_every: usize,
    pub heuristic_draws: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            world: WorldConfig::default(),
            trpo: TrpoConfig::default(),
            seed: 0,
            num_seeds: 6,
            out_dir: PathBuf::from("runs"),
            checkpoint_every: 100,
            heuristic_draws: 1000,
        }
    }
}

impl RunConfig {
    pub fn seeds(&self) -> Vec<u64> {
        (0..self.num_seeds).map(|i| sweep_seed(self.seed, i)).collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        self.world.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        self.trpo.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.heuristic_draws == 0 {
            return Err(HarnessError::Config("heuristic_draws must be at least 1".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self, HarnessError> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        let mut cfg = RunConfig::default();
        file.apply(&mut cfg)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    search_radius: Option<f64>,
    cluster_center: Option<[f64; 2]>,
    cluster_radius: Option<f64>,
    num_users: Option<usize>,
    h_min: Option<f64>,
    h_max: Option<f64>,
    v_min: Option<f64>,
    v_max: Option<f64>,
    slot_seconds: Option<f64>,
    horizon: Option<usize>,
    env_preset: Option<String>,
    reward_variant: Option<String>,
    beamwidth: Option<f64>,
    tx_power: Option<f64>,
    user_step_sigma: Option<f64>,
    carrier_hz: Option<f64>,
    bandwidth_hz: Option<f64>,
    pilot_power: Option<f64>,
    noise_power: Option<f64>,

    delta_kl: Option<f64>,
    gae_lambda: Option<f64>,
    batch_size: Option<usize>,
    iterations: Option<usize>,
    gamma: Option<f64>,
    backtrack_alpha: Option<f64>,
    max_backtracks: Option<usize>,
    cg_iters: Option<usize>,
    cg_damping: Option<f64>,
    cg_tol: Option<f64>,
    value_epochs: Option<usize>,
    value_lr: Option<f64>,
    value_minibatch: Option<usize>,

    seed: Option<u64>,
    num_seeds: Option<usize>,
    out_dir: Option<PathBuf>,
    checkpoint_every: Option<usize>,
    heuristic_draws: Option<usize>,
}

macro_rules! set {
    ($src:ident, $dst:expr; $($field:ident),* $(,)?) => {
        $( if let Some(v) = $src.$field { $dst.$field = v; } )*
    };
}

impl ConfigFile {
    fn apply(self, cfg: &mut RunConfig) -> Result<(), HarnessError> {
        let w = &mut cfg.world;
        set!(self, w; search_radius, cluster_center, cluster_radius, num_users, h_min, h_max, v_min, v_max,
            slot_seconds, horizon, beamwidth, tx_power, user_step_sigma, carrier_hz, bandwidth_hz,
            pilot_power, noise_power);
        if let Some(name) = &self.env_preset {
            w.env_preset = parse_env(name)?;
        }
        if let Some(name) = &self.reward_variant {
            w.reward_variant = parse_reward(name)?;
        }
        let t = &mut cfg.trpo;
        set!(self, t; delta_kl, gae_lambda, batch_size, iterations, gamma, backtrack_alpha, max_backtracks,
            cg_iters, cg_damping, cg_tol, value_epochs, value_lr, value_minibatch);
        set!(self, cfg; seed, num_seeds, out_dir, checkpoint_every, heuristic_draws);
        Ok(())
    }
}

pub fn parse_env(name: &str) -> Result<EnvPreset, HarnessError> {
    name.parse().map_err(|e: uavbs_core::channel::ChannelError| HarnessError::Config(e.to_string()))
}

pub fn parse_reward(name: &str) -> Result<RewardVariant, HarnessError> {
    name.parse().map_err(|e: uavbs_core::world::WorldError| HarnessError::Config(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_setup() {
        let c = RunConfig::default();
        assert_eq!(c.num_seeds, 6);
        assert_eq!(c.trpo.delta_kl, 0.02);
        assert_eq!(c.trpo.gae_lambda, 0.94);
        assert_eq!(c.trpo.batch_size, 10_000);
        assert_eq!(c.trpo.iterations, 4000);
        assert_eq!(c.trpo.gamma, 0.99);
        assert_eq!(c.world.horizon, 500);
        assert_eq!(c.seeds(), vec![0, 1000, 2000, 3000, 4000, 5000]);
    }

    #[test]
    fn flat_keys_override() {
        let c = RunConfig::from_toml(
            "env_preset = \"suburban\"\nreward_variant = \"r2\"\nnum_users = 5\nbatch_size = 64\ncluster_center = [100.0, -200.0]\nseed = 9\nnum_seeds = 2\n",
        )
        .unwrap();
        assert_eq!(c.world.env_preset, EnvPreset::SubUrban);
        assert_eq!(c.world.reward_variant, RewardVariant::R2);
        assert_eq!(c.world.num_users, 5);
        assert_eq!(c.world.cluster_center, [100.0, -200.0]);
        assert_eq!(c.trpo.batch_size, 64);
        assert_eq!(c.seeds(), vec![9, 1009]);
    }

    #[test]
    fn bad_files_are_config_errors() {
        for text in ["unknown_key = 1", "env_preset = \"moon\"", "h_min = 500.0", "gamma = 0.0", "batch_size = \"x\""] {
            assert!(matches!(RunConfig::from_toml(text), Err(HarnessError::Config(_))), "{text}");
        }
    }
}
