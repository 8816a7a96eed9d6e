//! Trust region policy optimization.
//!
//! One iteration collects `batch_size` on-policy transitions, computes
//! rewards-to-go and GAE advantages, estimates the policy gradient, solves
//! `F x = g` by conjugate gradient using Fisher-vector products, takes the
//! largest backtracked step that satisfies the KL bound and improves the
//! surrogate, and finally regresses the value network onto the returns.

pub mod batch;
pub mod cg;
pub mod gae;
pub mod policy;
mod trainer;
pub mod update;
pub mod value;

pub use batch::{collect, Batch, CollectRngs, StepRecord};
pub use cg::{conjugate_gradient, CgOutcome};
pub use gae::{compute_returns_and_gae, normalize_advantages};
pub use policy::{Policy, PolicyEval, ValueFunction};
pub use trainer::{summarize, IterationReport, Trainer, UpdateStats, UpdateStatus, ACTION_DIM, DEFAULT_HEURISTIC_DRAWS};
pub use update::{line_search, policy_gradient, surrogate, AcceptedStep, LineSearchOutcome};
pub use value::{update_value, Adam, ValueFit};

use thiserror::Error;

use crate::baseline::BaselineError;
use crate::nn::NnError;
use crate::world::WorldError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrpoError {
    #[error("invalid trpo config: {0}")]
    Config(&'static str),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    World(#[from] WorldError),
    #[error(transparent)]
    Baseline(#[from] BaselineError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrpoConfig {
    pub delta_kl: f64,
    pub gae_lambda: f64,
    pub batch_size: usize,
    pub iterations: usize,
    pub gamma: f64,
    pub backtrack_alpha: f64,
    pub max_backtracks: usize,
    pub cg_iters: usize,
    pub cg_damping: f64,
    pub cg_tol: f64,
    pub value_epochs: usize,
    pub value_lr: f64,
    pub value_minibatch: usize,
}

impl Default for TrpoConfig {
    fn default() -> Self {
        Self {
            delta_kl: 0.02,
            gae_lambda: 0.94,
            batch_size: 10_000,
            iterations: 4000,
            gamma: 0.99,
            backtrack_alpha: 0.8,
            max_backtracks: 10,
            cg_iters: 10,
            cg_damping: 0.1,
            cg_tol: 1e-10,
            value_epochs: 5,
            value_lr: 1e-3,
            value_minibatch: 256,
        }
    }
}

impl TrpoConfig {
    pub fn validate(&self) -> Result<(), TrpoError> {
        let check = |ok: bool, msg| if ok { Ok(()) } else { Err(TrpoError::Config(msg)) };
        check(self.delta_kl > 0.0 && self.delta_kl.is_finite(), "delta_kl must be positive")?;
        check(self.gamma > 0.0 && self.gamma <= 1.0, "gamma must lie in (0, 1]")?;
        check(self.gae_lambda > 0.0 && self.gae_lambda <= 1.0, "gae_lambda must lie in (0, 1]")?;
        check(self.batch_size >= 1, "batch_size must be at least 1")?;
        check(self.backtrack_alpha > 0.0 && self.backtrack_alpha < 1.0, "backtrack_alpha must lie in (0, 1)")?;
        check(self.cg_iters >= 1, "cg_iters must be at least 1")?;
        check(self.cg_damping >= 0.0 && self.cg_tol >= 0.0, "cg_damping and cg_tol must be non-negative")?;
        check(self.value_lr > 0.0 && self.value_minibatch >= 1, "value_lr and value_minibatch must be positive")
    }
}
