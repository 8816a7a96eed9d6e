//! On-policy batch collection.

use alloc::vec::Vec;

use crate::rng::SimRng;
use crate::trpo::policy::{scale_observation, Policy};
use crate::trpo::TrpoError;
use crate::world::{Action, World};

/// Per-step diagnostics kept for metrics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub delta_a: f64,
    pub speed_violation: bool,
    pub boundary_violation: bool,
    pub speed: f64,
    pub height: f64,
    /// Horizontal distance from the UAV to the cluster center.
    pub dist_to_cluster: f64,
    pub sum_rss_snr: f64,
    /// Sum over users of the downlink rate, bits/s.
    pub sum_rate: f64,
}

/// `len` transitions from consecutive episodes. Row-major per-step arrays;
/// `states` and `next_states` hold scaled network inputs.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub obs_dim: usize,
    pub action_dim: usize,
    pub states: Vec<f64>,
    pub actions: Vec<f64>,
    pub rewards: Vec<f64>,
    pub dones: Vec<bool>,
    pub next_states: Vec<f64>,
    pub log_probs_old: Vec<f64>,
    pub returns: Vec<f64>,
    pub advantages: Vec<f64>,
    pub records: Vec<StepRecord>,
    /// User positions at the start of each episode in the batch.
    pub episode_users: Vec<Vec<[f64; 2]>>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn action(&self, i: usize) -> &[f64] {
        &self.actions[i * self.action_dim..(i + 1) * self.action_dim]
    }
}

/// Random streams consumed while collecting.
pub struct CollectRngs<'a> {
    pub geometry: &'a mut SimRng,
    pub channel: &'a mut SimRng,
    pub actions: &'a mut SimRng,
}

/// Runs the current stochastic policy for exactly `n` transitions. Each
/// episode lasts the world horizon; the last one is cut at `n` and keeps
/// `done = false`. Old log-probabilities are evaluated in one batched pass
/// so that the probability ratio is exactly 1 at the collecting policy.
pub fn collect(policy: &Policy, world: &World, n: usize, rngs: CollectRngs<'_>) -> Result<Batch, TrpoError> {
    let cfg = world.config();
    let s = policy.obs_dim();
    let b = policy.action_dim();
    if s != cfg.num_users {
        return Err(TrpoError::Config("policy input width must equal the number of users"));
    }
    let mut batch = Batch {
        obs_dim: s,
        action_dim: b,
        states: Vec::with_capacity(n * s),
        actions: Vec::with_capacity(n * b),
        rewards: Vec::with_capacity(n),
        dones: Vec::with_capacity(n),
        next_states: Vec::with_capacity(n * s),
        log_probs_old: Vec::new(),
        returns: Vec::new(),
        advantages: Vec::new(),
        records: Vec::with_capacity(n),
        episode_users: Vec::new(),
    };
    let CollectRngs { geometry, channel, actions } = rngs;
    let mut episode: Option<(crate::world::WorldState, Vec<f64>)> = None;
    let mut input = Vec::with_capacity(s);
    while batch.len() < n {
        let (state, obs) = match episode.take() {
            Some(e) => e,
            None => {
                let (st, ob) = world.reset(geometry, channel);
                batch.episode_users.push(st.users_xy.clone());
                (st, ob)
            }
        };
        input.clear();
        scale_observation(&obs, &mut input);
        let raw = policy.act(&input, actions)?;
        let (next, out) = world.step(&state, &Action::from_slice(&raw), geometry, channel)?;

        batch.states.extend_from_slice(&input);
        batch.actions.extend_from_slice(&raw);
        batch.rewards.push(out.reward);
        batch.dones.push(out.done);
        scale_observation(&out.observation, &mut batch.next_states);
        let d = &out.diagnostics;
        let [cx, cy] = cfg.cluster_center;
        batch.records.push(StepRecord {
            delta_a: d.delta_a,
            speed_violation: d.speed_violation == 1,
            boundary_violation: d.boundary_violation == 1,
            speed: d.speed,
            height: next.uav_xyz[2],
            dist_to_cluster: libm::hypot(next.uav_xyz[0] - cx, next.uav_xyz[1] - cy),
            sum_rss_snr: d.sum_rss_snr,
            sum_rate: d.per_user_rate.iter().sum(),
        });
        if !out.done {
            episode = Some((next, out.observation));
        }
    }
    let eval = policy.evaluate(&batch.states, n)?;
    batch.log_probs_old = policy.log_probs(&eval, &batch.actions);
    Ok(batch)
}
