//! Episodic UAV base-station environment.
//!
//! The agent commands a speed vector `(speed, azimuth, polar)` in spherical
//! coordinates each slot. Infeasible components are clamped and executed,
//! motion is clipped to the square search box `[-R, R]^2 x [h_min, h_max]`,
//! and every violation adds its normalized excess to the penalty `delta_a`.
//! Observations are the per-user uplink RSS-to-noise ratios in dB.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::channel::{
    self, AntennaPattern, ChannelError, EnvParams, EnvPreset, LinkGeometry, LinkRealization,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorldError {
    #[error("invalid world config: {0}")]
    InvalidConfig(&'static str),
    #[error("episode already finished at step {0}")]
    EpisodeFinished(usize),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("unknown reward variant `{0}`")]
    UnknownReward(alloc::string::String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewardVariant {
    /// Scales the utility term by 0.1 whenever a penalty is incurred.
    R1,
    R2,
}

impl RewardVariant {
    pub fn name(self) -> &'static str {
        match self {
            RewardVariant::R1 => "r1",
            RewardVariant::R2 => "r2",
        }
    }
}

impl fmt::Display for RewardVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RewardVariant {
    type Err = WorldError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "r1" => Ok(RewardVariant::R1),
            "r2" => Ok(RewardVariant::R2),
            other => Err(WorldError::UnknownReward(other.into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldConfig {
    /// Half-width of the square search box, meters.
    pub search_radius: f64,
    pub cluster_center: [f64; 2],
    pub cluster_radius: f64,
    pub num_users: usize,
    pub h_min: f64,
    pub h_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub slot_seconds: f64,
    pub horizon: usize,
    pub env_preset: EnvPreset,
    pub reward_variant: RewardVariant,
    pub beamwidth: f64,
    pub tx_power: f64,
    /// Per-slot standard deviation of each user coordinate; 0 freezes users.
    pub user_step_sigma: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub pilot_power: f64,
    pub noise_power: f64,
}

impl Default for WorldConfig {
    fn default() -> Self {
        Self {
            search_radius: 2000.0,
            cluster_center: [1500.0, 1500.0],
            cluster_radius: 100.0,
            num_users: 10,
            h_min: 40.0,
            h_max: 150.0,
            v_min: 0.0,
            v_max: 100.0,
            slot_seconds: 1.0,
            horizon: 500,
            env_preset: EnvPreset::HighRise,
            reward_variant: RewardVariant::R1,
            beamwidth: PI / 3.0,
            tx_power: 1.0,
            user_step_sigma: 1.0,
            carrier_hz: 2e9,
            bandwidth_hz: 1e6,
            pilot_power: 0.1,
            // -170 dBm
            noise_power: 1e-20,
        }
    }
}

impl WorldConfig {
    pub fn validate(&self) -> Result<(), WorldError> {
        let finite = [
            self.search_radius,
            self.cluster_center[0],
            self.cluster_center[1],
            self.cluster_radius,
            self.h_min,
            self.h_max,
            self.v_min,
            self.v_max,
            self.slot_seconds,
            self.beamwidth,
            self.tx_power,
            self.user_step_sigma,
            self.carrier_hz,
            self.bandwidth_hz,
            self.pilot_power,
            self.noise_power,
        ]
        .iter()
        .all(|v| v.is_finite());
        let check = |ok: bool, msg| if ok { Ok(()) } else { Err(WorldError::InvalidConfig(msg)) };
        check(finite, "all values must be finite")?;
        check(self.search_radius > 0.0, "search_radius must be positive")?;
        check(self.cluster_radius >= 0.0, "cluster_radius must be non-negative")?;
        let [cx, cy] = self.cluster_center;
        check(
            cx.abs() + self.cluster_radius <= self.search_radius
                && cy.abs() + self.cluster_radius <= self.search_radius,
            "cluster must fit inside the search area",
        )?;
        check(self.num_users >= 1, "num_users must be at least 1")?;
        check(self.h_min > 0.0 && self.h_min < self.h_max, "need 0 < h_min < h_max")?;
        check(self.v_min >= 0.0 && self.v_min < self.v_max, "need 0 <= v_min < v_max")?;
        check(self.slot_seconds > 0.0, "slot_seconds must be positive")?;
        check(self.horizon >= 1, "horizon must be at least 1")?;
        check(self.beamwidth > 0.0 && self.beamwidth < PI, "beamwidth must lie in (0, pi)")?;
        check(
            self.tx_power > 0.0
                && self.pilot_power > 0.0
                && self.noise_power > 0.0
                && self.bandwidth_hz > 0.0
                && self.carrier_hz > 0.0,
            "powers, bandwidth and carrier must be positive",
        )?;
        check(self.user_step_sigma >= 0.0, "user_step_sigma must be non-negative")
    }
}

/// Commanded speed vector in spherical coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Action {
    pub speed: f64,
    pub azimuth: f64,
    pub polar: f64,
}

impl Action {
    pub fn new(speed: f64, azimuth: f64, polar: f64) -> Self {
        Self { speed, azimuth, polar }
    }

    pub fn from_slice(raw: &[f64]) -> Self {
        Self::new(raw[0], raw[1], raw[2])
    }

    pub fn is_feasible(&self, cfg: &WorldConfig) -> bool {
        (cfg.v_min..=cfg.v_max).contains(&self.speed)
            && (0.0..=TAU).contains(&self.azimuth)
            && (0.0..=PI).contains(&self.polar)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub uav_xyz: [f64; 3],
    pub users_xy: Vec<[f64; 2]>,
    pub step_index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub delta_a: f64,
    /// 1 if any action component was infeasible and had to be clamped.
    pub speed_violation: u8,
    /// 1 if the motion had to be clipped at the search-box or height limits.
    pub boundary_violation: u8,
    /// Downlink rate of each user, bits/s.
    pub per_user_rate: Vec<f64>,
    /// Linear sum over users of rss / noise.
    pub sum_rss_snr: f64,
    /// Executed (clamped) speed, m/s.
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    /// Per-user uplink RSS-to-noise ratio in dB.
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub diagnostics: Diagnostics,
}

/// Executed motion after clamping and clipping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    pub clamped: Action,
    pub target: [f64; 3],
    pub clipped: [f64; 3],
}

impl Motion {
    pub fn plan(from: [f64; 3], action: &Action, cfg: &WorldConfig) -> Self {
        let clamped = Action {
            speed: action.speed.clamp(cfg.v_min, cfg.v_max),
            azimuth: action.azimuth.clamp(0.0, TAU),
            polar: action.polar.clamp(0.0, PI),
        };
        let step = clamped.speed * cfg.slot_seconds;
        let (sin_p, cos_p) = libm::sincos(clamped.polar);
        let (sin_a, cos_a) = libm::sincos(clamped.azimuth);
        let target = [
            from[0] + step * sin_p * cos_a,
            from[1] + step * sin_p * sin_a,
            from[2] + step * cos_p,
        ];
        let r = cfg.search_radius;
        let clipped = [
            target[0].clamp(-r, r),
            target[1].clamp(-r, r),
            target[2].clamp(cfg.h_min, cfg.h_max),
        ];
        Self { clamped, target, clipped }
    }

    pub fn was_clipped(&self) -> bool {
        self.target != self.clipped
    }
}

fn excess(value: f64, lo: f64, hi: f64) -> f64 {
    if value < lo {
        lo - value
    } else if value > hi {
        value - hi
    } else {
        0.0
    }
}

/// Sum of normalized excesses over all violated constraints. Each term is
/// the distance outside the allowed range divided by the range span.
pub fn action_penalty(action: &Action, motion: &Motion, cfg: &WorldConfig) -> f64 {
    let span_xy = 2.0 * cfg.search_radius;
    let span_h = cfg.h_max - cfg.h_min;
    excess(action.speed, cfg.v_min, cfg.v_max) / (cfg.v_max - cfg.v_min)
        + excess(action.azimuth, 0.0, TAU) / TAU
        + excess(action.polar, 0.0, PI) / PI
        + (motion.target[0] - motion.clipped[0]).abs() / span_xy
        + (motion.target[1] - motion.clipped[1]).abs() / span_xy
        + (motion.target[2] - motion.clipped[2]).abs() / span_h
}

/// Utility term shared by both rewards: sum of rates (bits/s/Hz) plus 0.01
/// times the sum of RSS-to-noise ratios in dB.
fn utility(rates: &[f64], rss_snr_db: &[f64]) -> f64 {
    rates.iter().sum::<f64>() + 0.01 * rss_snr_db.iter().sum::<f64>()
}

pub fn reward_r1(rates: &[f64], rss_snr_db: &[f64], delta_a: f64) -> f64 {
    let u = utility(rates, rss_snr_db);
    if delta_a > 0.0 {
        0.1 * u - 5.0 * delta_a
    } else {
        u
    }
}

pub fn reward_r2(rates: &[f64], rss_snr_db: &[f64], delta_a: f64) -> f64 {
    utility(rates, rss_snr_db) - 5.0 * delta_a
}

pub fn reward(variant: RewardVariant, rates: &[f64], rss_snr_db: &[f64], delta_a: f64) -> f64 {
    match variant {
        RewardVariant::R1 => reward_r1(rates, rss_snr_db, delta_a),
        RewardVariant::R2 => reward_r2(rates, rss_snr_db, delta_a),
    }
}

/// Point drawn uniformly on a disk.
fn uniform_disk<R: Rng + ?Sized>(center: [f64; 2], radius: f64, rng: &mut R) -> [f64; 2] {
    let r = radius * libm::sqrt(rng.random::<f64>());
    let (s, c) = libm::sincos(TAU * rng.random::<f64>());
    [center[0] + r * c, center[1] + r * s]
}

/// Mirrors a point that left the disk back inside along its radius.
fn reflect_into_disk(p: [f64; 2], center: [f64; 2], radius: f64) -> [f64; 2] {
    let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
    let r = libm::hypot(dx, dy);
    if r <= radius {
        return p;
    }
    let reflected = (2.0 * radius - r).clamp(0.0, radius);
    let s = reflected / r;
    [center[0] + dx * s, center[1] + dy * s]
}

/// Uplink and downlink realization of one user link in one slot. Both
/// directions share the LOS state and shadowing; fading is independent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkPair {
    pub uplink: LinkRealization,
    pub downlink: LinkRealization,
}

#[derive(Debug, Clone)]
pub struct World {
    config: WorldConfig,
    env: EnvParams,
    pattern: AntennaPattern,
}

impl World {
    pub fn new(config: WorldConfig) -> Result<Self, WorldError> {
        config.validate()?;
        Ok(Self {
            env: config.env_preset.params(),
            pattern: AntennaPattern::new(config.beamwidth),
            config,
        })
    }

    pub fn config(&self) -> &WorldConfig {
        &self.config
    }

    pub fn env_params(&self) -> &EnvParams {
        &self.env
    }

    pub fn pattern(&self) -> &AntennaPattern {
        &self.pattern
    }

    pub fn sample_link_pair<R: Rng + ?Sized>(
        &self,
        uav: [f64; 3],
        user: [f64; 2],
        rng: &mut R,
    ) -> Result<LinkPair, ChannelError> {
        let geom = LinkGeometry::new(uav, user)?;
        let large = channel::sample_large_scale(&self.env, &geom, rng);
        let fc = self.config.carrier_hz;
        let up = channel::sample_fading(large.is_los, rng);
        let down = channel::sample_fading(large.is_los, rng);
        Ok(LinkPair {
            uplink: LinkRealization::assemble(large, up, &geom, &self.pattern, fc),
            downlink: LinkRealization::assemble(large, down, &geom, &self.pattern, fc),
        })
    }

    /// Downlink rate in bits/s for a realized link under equal time division.
    pub fn downlink_rate(&self, link: &LinkRealization) -> f64 {
        let c = &self.config;
        channel::per_user_rate(link.total_gain, c.tx_power, c.num_users, c.noise_power, c.bandwidth_hz)
    }

    /// Uplink pilot RSS over noise, linear. Floored to keep the dB value finite.
    pub fn rss_snr(&self, link: &LinkRealization) -> f64 {
        (channel::rss(link, self.config.pilot_power) / self.config.noise_power).max(f64::MIN_POSITIVE)
    }

    pub fn reset<R: Rng + ?Sized>(&self, geometry: &mut R, chan: &mut R) -> (WorldState, Vec<f64>) {
        let c = &self.config;
        let users_xy: Vec<[f64; 2]> = (0..c.num_users)
            .map(|_| uniform_disk(c.cluster_center, c.cluster_radius, geometry))
            .collect();
        let r = c.search_radius;
        let uav_xyz = [
            geometry.random_range(-r..=r),
            geometry.random_range(-r..=r),
            geometry.random_range(c.h_min..=c.h_max),
        ];
        let state = WorldState { uav_xyz, users_xy, step_index: 0 };
        let observation = state
            .users_xy
            .iter()
            .map(|&u| {
                let pair = self.sample_link_pair(uav_xyz, u, chan).expect("valid geometry");
                10.0 * libm::log10(self.rss_snr(&pair.uplink))
            })
            .collect();
        (state, observation)
    }

    pub fn step<R: Rng + ?Sized>(
        &self,
        state: &WorldState,
        action: &Action,
        geometry: &mut R,
        chan: &mut R,
    ) -> Result<(WorldState, StepOutcome), WorldError> {
        let c = &self.config;
        if state.step_index >= c.horizon {
            return Err(WorldError::EpisodeFinished(state.step_index));
        }
        let motion = Motion::plan(state.uav_xyz, action, c);
        let delta_a = action_penalty(action, &motion, c);
        let uav = motion.clipped;

        let users_xy: Vec<[f64; 2]> = state
            .users_xy
            .iter()
            .map(|&u| {
                if c.user_step_sigma == 0.0 {
                    return u;
                }
                let dx: f64 = StandardNormal.sample(geometry);
                let dy: f64 = StandardNormal.sample(geometry);
                let moved = [u[0] + c.user_step_sigma * dx, u[1] + c.user_step_sigma * dy];
                reflect_into_disk(moved, c.cluster_center, c.cluster_radius)
            })
            .collect();

        let k = users_xy.len();
        let mut observation = Vec::with_capacity(k);
        let mut per_user_rate = Vec::with_capacity(k);
        let mut sum_rss_snr = 0.0;
        for &u in &users_xy {
            let pair = self.sample_link_pair(uav, u, chan)?;
            let snr = self.rss_snr(&pair.uplink);
            sum_rss_snr += snr;
            observation.push(10.0 * libm::log10(snr));
            per_user_rate.push(self.downlink_rate(&pair.downlink));
        }
        let spectral: Vec<f64> = per_user_rate.iter().map(|r| r / c.bandwidth_hz).collect();
        let reward = reward(c.reward_variant, &spectral, &observation, delta_a);

        let next = WorldState { uav_xyz: uav, users_xy, step_index: state.step_index + 1 };
        let outcome = StepOutcome {
            observation,
            reward,
            done: next.step_index == c.horizon,
            diagnostics: Diagnostics {
                delta_a,
                speed_violation: u8::from(!action.is_feasible(c)),
                boundary_violation: u8::from(motion.was_clipped()),
                per_user_rate,
                sum_rss_snr,
                speed: motion.clamped.speed,
            },
        };
        Ok((next, outcome))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamId};
    use approx::assert_relative_eq;

    fn rngs(seed: u64) -> (crate::SimRng, crate::SimRng) {
        (stream(seed, StreamId::Geometry), stream(seed, StreamId::Channel))
    }

    #[test]
    fn defaults_are_valid() {
        let c = WorldConfig::default();
        c.validate().unwrap();
        assert_eq!((c.h_min, c.h_max, c.v_min, c.v_max), (40.0, 150.0, 0.0, 100.0));
        assert_eq!(c.num_users, 10);
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = [
            WorldConfig { h_min: 200.0, ..Default::default() },
            WorldConfig { v_max: -1.0, ..Default::default() },
            WorldConfig { cluster_center: [1950.0, 0.0], ..Default::default() },
            WorldConfig { num_users: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(matches!(World::new(c), Err(WorldError::InvalidConfig(_))));
        }
    }

    #[test]
    fn degenerate_cluster_puts_users_at_center() {
        let cfg = WorldConfig { cluster_radius: 0.0, ..Default::default() };
        let world = World::new(cfg).unwrap();
        let (mut g, mut ch) = rngs(1);
        let (state, obs) = world.reset(&mut g, &mut ch);
        assert!(state.users_xy.iter().all(|u| *u == [1500.0, 1500.0]));
        assert_eq!(obs.len(), 10);
        let (next, _) = world.step(&state, &Action::new(10.0, 1.0, 1.0), &mut g, &mut ch).unwrap();
        assert!(next.users_xy.iter().all(|u| *u == [1500.0, 1500.0]));
    }

    #[test]
    fn reset_is_deterministic() {
        let world = World::new(WorldConfig::default()).unwrap();
        let (mut g1, mut c1) = rngs(9);
        let (mut g2, mut c2) = rngs(9);
        assert_eq!(world.reset(&mut g1, &mut c1), world.reset(&mut g2, &mut c2));
    }

    #[test]
    fn zero_speed_keeps_position() {
        let world = World::new(WorldConfig::default()).unwrap();
        let (mut g, mut ch) = rngs(2);
        let (state, _) = world.reset(&mut g, &mut ch);
        let (next, out) = world.step(&state, &Action::new(0.0, 0.3, 2.0), &mut g, &mut ch).unwrap();
        assert_eq!(next.uav_xyz, state.uav_xyz);
        assert_eq!(out.diagnostics.delta_a, 0.0);
        assert_eq!(out.diagnostics.speed_violation, 0);
        assert_eq!(out.diagnostics.boundary_violation, 0);
    }

    #[test]
    fn overspeed_is_clamped_and_penalized() {
        let world = World::new(WorldConfig::default()).unwrap();
        let state = WorldState { uav_xyz: [0.0, 0.0, 100.0], users_xy: vec![[1500.0, 1500.0]; 10], step_index: 0 };
        let (mut g, mut ch) = rngs(3);
        let (next, out) = world.step(&state, &Action::new(150.0, 0.0, PI / 2.0), &mut g, &mut ch).unwrap();
        assert_relative_eq!(next.uav_xyz[0], 100.0, epsilon = 1e-9);
        assert_eq!(out.diagnostics.speed, 100.0);
        assert_eq!(out.diagnostics.speed_violation, 1);
        assert_relative_eq!(out.diagnostics.delta_a, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn ceiling_holds_height() {
        let world = World::new(WorldConfig::default()).unwrap();
        let state = WorldState { uav_xyz: [0.0, 0.0, 150.0], users_xy: vec![[1500.0, 1500.0]; 10], step_index: 0 };
        let (mut g, mut ch) = rngs(4);
        let (next, out) = world.step(&state, &Action::new(20.0, 0.0, 0.0), &mut g, &mut ch).unwrap();
        assert_eq!(next.uav_xyz[2], 150.0);
        assert_eq!(out.diagnostics.boundary_violation, 1);
        assert!(out.diagnostics.delta_a > 0.0);
    }

    #[test]
    fn episode_ends_at_horizon() {
        let cfg = WorldConfig { horizon: 3, ..Default::default() };
        let world = World::new(cfg).unwrap();
        let (mut g, mut ch) = rngs(5);
        let (mut state, _) = world.reset(&mut g, &mut ch);
        let a = Action::new(1.0, 1.0, 1.0);
        for i in 0..3 {
            let (next, out) = world.step(&state, &a, &mut g, &mut ch).unwrap();
            assert_eq!(out.done, i == 2);
            state = next;
        }
        assert_eq!(world.step(&state, &a, &mut g, &mut ch), Err(WorldError::EpisodeFinished(3)));
    }

    #[test]
    fn penalty_examples() {
        let cfg = WorldConfig::default();
        let from = [0.0, 0.0, 100.0];
        let ok = Action::new(10.0, 1.0, 1.0);
        assert_eq!(action_penalty(&ok, &Motion::plan(from, &ok, &cfg), &cfg), 0.0);
        let fast = Action::new(110.0, 1.0, PI / 2.0);
        assert_relative_eq!(action_penalty(&fast, &Motion::plan(from, &fast, &cfg), &cfg), 0.1, epsilon = 1e-12);
        let both = Action::new(110.0, TAU + 0.2, PI / 2.0);
        let expect = 0.1 + 0.2 / TAU;
        assert_relative_eq!(action_penalty(&both, &Motion::plan(from, &both, &cfg), &cfg), expect, epsilon = 1e-12);
    }

    #[test]
    fn reward_examples() {
        let rates = [1.5, 0.5];
        let rss = [4.0, 6.0];
        assert_relative_eq!(reward_r1(&rates, &rss, 0.0), 2.1, epsilon = 1e-12);
        assert_relative_eq!(reward_r1(&rates, &rss, 0.1), -0.29, epsilon = 1e-12);
        assert_relative_eq!(reward_r2(&rates, &rss, 0.0), 2.1, epsilon = 1e-12);
        assert_eq!(reward_r1(&[0.0; 3], &[0.0; 3], 0.0), 0.0);
        assert_eq!(reward_r2(&[0.0; 3], &[0.0; 3], 1.0), -5.0);
    }

    #[test]
    fn reflection_stays_inside() {
        let c = [0.0, 0.0];
        assert_eq!(reflect_into_disk([3.0, 4.0], c, 10.0), [3.0, 4.0]);
        let p = reflect_into_disk([12.0, 0.0], c, 10.0);
        assert_relative_eq!(p[0], 8.0);
        let far = reflect_into_disk([0.0, -35.0], c, 10.0);
        assert!(libm::hypot(far[0], far[1]) <= 10.0);
    }

    #[test]
    fn names_parse() {
        assert_eq!("r1".parse::<RewardVariant>().unwrap(), RewardVariant::R1);
        assert_eq!("r2".parse::<RewardVariant>().unwrap(), RewardVariant::R2);
        assert!("r3".parse::<RewardVariant>().is_err());
    }
}
