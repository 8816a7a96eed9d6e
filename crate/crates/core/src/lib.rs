//! Core of the UAV base-station mobility trainer.
//!
//! A UAV-mounted base station serves a cluster of ground users and only sees
//! the received signal strength (RSS) of each user. This crate contains the
//! pieces needed to learn a 3-D velocity policy from that observation:
//!
//! - [`channel`]: air-to-ground propagation (LOS probability, log-normal
//!   shadowing, Nakagami/Rayleigh fading, directional antenna, rates).
//! - [`world`]: the episodic environment with constraint penalties and the
//!   two reward functions.
//! - [`nn`]: dense tanh networks with hand-written backpropagation and the
//!   diagonal Gaussian action distribution.
//! - [`trpo`]: batch collection, GAE, Fisher-vector products, conjugate
//!   gradient, the KL-constrained line search and value regression.
//! - [`baseline`]: the location-aware heuristic placement and the rate ratio.
//!
//! The crate is `no_std` + `alloc` when built without the default `std`
//! feature. File formats, configuration and the CLI live in `uavbs-harness`.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod baseline;
pub mod channel;
pub mod metrics;
pub mod nn;
pub mod rng;
pub mod trpo;
pub mod world;

pub use baseline::{heuristic_placement, rate_ratio, HeuristicPlacement};
pub use channel::{AntennaPattern, EnvParams, EnvPreset, LinkGeometry, LinkRealization};
pub use metrics::MetricsRow;
pub use rng::{SeedStreams, SimRng};
pub use trpo::{Trainer, TrpoConfig};
pub use world::{Action, RewardVariant, World, WorldConfig, WorldState};
