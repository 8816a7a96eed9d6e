//! Location-aware heuristic benchmark.
//!
//! The heuristic UAV hovers over the cluster center at the lowest height that
//! puts every user inside the antenna main lobe, clamped to the allowed
//! height range. With the default geometry (radius 100 m, beamwidth pi/3,
//! ceiling 150 m) edge users need about 173 m, so the clamp is active and
//! the shortfall flag reports it.

use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use crate::channel::ChannelError;
use crate::world::{World, WorldConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BaselineError {
    #[error("heuristic placement needs at least one user")]
    NoUsers,
    #[error("heuristic rate is zero")]
    ZeroDenominator,
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeuristicPlacement {
    pub position: [f64; 3],
    /// Height needed to cover every user in the main lobe, before clamping.
    pub required_height: f64,
    /// True when `required_height` exceeds `h_max`.
    pub shortfall: bool,
}

pub fn heuristic_placement(users: &[[f64; 2]], cfg: &WorldConfig) -> Result<HeuristicPlacement, BaselineError> {
    if users.is_empty() {
        return Err(BaselineError::NoUsers);
    }
    let [cx, cy] = cfg.cluster_center;
    let farthest = users
        .iter()
        .map(|u| libm::hypot(cx - u[0], cy - u[1]))
        .fold(0.0, f64::max);
    let slope = libm::tan(core::f64::consts::FRAC_PI_2 - cfg.beamwidth / 2.0);
    let mut required = farthest * slope;
    // Main-lobe membership is strict; nudge up until the farthest user is in.
    while farthest > 0.0 && !(farthest < required / slope) {
        required = required.next_up();
    }
    Ok(HeuristicPlacement {
        position: [cx, cy, required.clamp(cfg.h_min, cfg.h_max)],
        required_height: required,
        shortfall: required > cfg.h_max,
    })
}

/// Mean over `draws` independent channel realizations of the total downlink
/// rate (bits/s) delivered from `uav` to `users`.
pub fn mean_sum_rate<R: Rng + ?Sized>(
    world: &World,
    uav: [f64; 3],
    users: &[[f64; 2]],
    draws: usize,
    rng: &mut R,
) -> Result<f64, BaselineError> {
    let mut total = 0.0;
    for _ in 0..draws {
        for &u in users {
            let pair = world.sample_link_pair(uav, u, rng)?;
            total += world.downlink_rate(&pair.downlink);
        }
    }
    Ok(total / draws.max(1) as f64)
}

/// Heuristic placement for `users` and its mean total rate.
pub fn heuristic_rate<R: Rng + ?Sized>(
    world: &World,
    users: &[[f64; 2]],
    draws: usize,
    rng: &mut R,
) -> Result<(HeuristicPlacement, f64), BaselineError> {
    let place = heuristic_placement(users, world.config())?;
    let rate = mean_sum_rate(world, place.position, users, draws, rng)?;
    Ok((place, rate))
}

/// Agent rate over heuristic rate.
pub fn rate_ratio(agent_mean: f64, heuristic_mean: f64) -> Result<f64, BaselineError> {
    if !(heuristic_mean > 0.0) {
        return Err(BaselineError::ZeroDenominator);
    }
    Ok(agent_mean.max(0.0) / heuristic_mean)
}

/// Per-user downlink rates averaged over draws, for diagnostics.
pub fn mean_user_rates<R: Rng + ?Sized>(
    world: &World,
    uav: [f64; 3],
    users: &[[f64; 2]],
    draws: usize,
    rng: &mut R,
) -> Result<Vec<f64>, BaselineError> {
    let mut acc = alloc::vec![0.0; users.len()];
    for _ in 0..draws {
        for (a, &u) in acc.iter_mut().zip(users) {
            let pair = world.sample_link_pair(uav, u, rng)?;
            *a += world.downlink_rate(&pair.downlink);
        }
    }
    acc.iter_mut().for_each(|a| *a /= draws.max(1) as f64);
    Ok(acc)
}
