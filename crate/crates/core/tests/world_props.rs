use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use rand::Rng;
use uavbs_core::rng::{stream, StreamId};
use uavbs_core::world::{action_penalty, reward_r1, reward_r2, Motion};
use uavbs_core::{Action, World, WorldConfig};

fn streams(seed: u64) -> (uavbs_core::SimRng, uavbs_core::SimRng) {
    (stream(seed, StreamId::Geometry), stream(seed, StreamId::Channel))
}

#[test]
fn long_random_walk_respects_every_bound() {
    let cfg = WorldConfig::default();
    let world = World::new(cfg.clone()).unwrap();
    let (mut geo, mut chan) = streams(11);
    let mut actions = stream(11, StreamId::Actions);
    let (mut state, _) = world.reset(&mut geo, &mut chan);
    let r = cfg.search_radius;
    for _ in 0..100_000 {
        // Deliberately wide ranges so clamping and clipping are exercised.
        let a = Action::new(
            actions.random_range(-50.0..200.0),
            actions.random_range(-1.0..7.5),
            actions.random_range(-0.5..3.7),
        );
        let (next, out) = world.step(&state, &a, &mut geo, &mut chan).unwrap();
        let [x, y, h] = next.uav_xyz;
        assert!((-r..=r).contains(&x) && (-r..=r).contains(&y));
        assert!((cfg.h_min..=cfg.h_max).contains(&h));
        for u in &next.users_xy {
            let d = ((u[0] - cfg.cluster_center[0]).powi(2) + (u[1] - cfg.cluster_center[1]).powi(2)).sqrt();
            assert!(d <= cfg.cluster_radius + 1e-9, "user left the cluster: {d}");
        }
        assert_eq!(out.observation.len(), cfg.num_users);
        assert!(out.observation.iter().all(|v| v.is_finite()));
        assert!(out.reward.is_finite());
        assert!(out.diagnostics.delta_a >= 0.0);
        assert_eq!(out.done, next.step_index == cfg.horizon);
        state = if out.done { world.reset(&mut geo, &mut chan).0 } else { next };
    }
}

#[test]
fn mean_reset_user_position_is_cluster_center() {
    let cfg = WorldConfig { num_users: 1, ..WorldConfig::default() };
    let world = World::new(cfg.clone()).unwrap();
    let (mut geo, mut chan) = streams(3);
    let n = 100_000;
    let mut sum = [0.0; 2];
    for _ in 0..n {
        let (s, _) = world.reset(&mut geo, &mut chan);
        sum[0] += s.users_xy[0][0];
        sum[1] += s.users_xy[0][1];
    }
    for (i, c) in cfg.cluster_center.iter().enumerate() {
        assert!((sum[i] / n as f64 - c).abs() < 1.0);
    }
}

#[test]
fn step_is_determined_by_state_action_and_seed() {
    let world = World::new(WorldConfig::default()).unwrap();
    let (mut geo, mut chan) = streams(5);
    let (state, _) = world.reset(&mut geo, &mut chan);
    let a = Action::new(30.0, 1.0, 1.2);
    let run = || {
        let (mut g, mut c) = streams(99);
        world.step(&state, &a, &mut g, &mut c).unwrap()
    };
    assert_eq!(run(), run());
}

fn action() -> impl Strategy<Value = Action> {
    (-50.0f64..200.0, -2.0f64..8.0, -1.0f64..4.5).prop_map(|(s, a, p)| Action::new(s, a, p))
}

proptest! {
    #[test]
    fn penalty_vanishes_iff_feasible_and_in_bounds(
        a in action(),
        x in -2000.0f64..2000.0,
        y in -2000.0f64..2000.0,
        h in 40.0f64..150.0,
    ) {
        let cfg = WorldConfig::default();
        let m = Motion::plan([x, y, h], &a, &cfg);
        let d = action_penalty(&a, &m, &cfg);
        prop_assert!(d >= 0.0);
        prop_assert_eq!(d == 0.0, a.is_feasible(&cfg) && !m.was_clipped());
    }

    #[test]
    fn clamped_action_is_feasible(a in action()) {
        let cfg = WorldConfig::default();
        let m = Motion::plan([0.0, 0.0, 100.0], &a, &cfg);
        prop_assert!(m.clamped.is_feasible(&cfg));
        prop_assert!((0.0..=TAU).contains(&m.clamped.azimuth) && (0.0..=PI).contains(&m.clamped.polar));
    }

    #[test]
    fn rewards_agree_without_penalty(
        rates in prop::collection::vec(0.0f64..20.0, 1..12),
        snr in prop::collection::vec(-50.0f64..150.0, 1..12),
    ) {
        prop_assert_eq!(reward_r1(&rates, &snr, 0.0), reward_r2(&rates, &snr, 0.0));
    }
}
