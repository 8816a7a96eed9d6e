//! Air-to-ground propagation.
//!
//! Link gain between the UAV and a ground user is
//!
//! ```text
//! total = antenna * fspl(d_3d, f_c) * fading / 10^(U/10)
//! ```
//!
//! where the LOS/NLOS mode is drawn from an elevation-dependent probability,
//! `U ~ Normal(mu_mode, sigma_mode(elevation))` in dB is applied as excess
//! attenuation, LOS fading is a unit-mean Gamma(10) power gain (Nakagami-m,
//! m = 10) and NLOS fading is a unit-mean exponential power gain.

use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use thiserror::Error;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Nakagami-m shape of the LOS fading.
pub const NAKAGAMI_M: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("non-finite link geometry")]
    NonFiniteGeometry,
    #[error("UAV height must be positive, got {0}")]
    NonPositiveHeight(f64),
    #[error("unknown environment preset `{0}`")]
    UnknownPreset(alloc::string::String),
}

/// Air-to-ground parameters of one radio environment.
///
/// `phi`/`psi` shape the LOS probability curve; `mu_*` are the mean excess
/// losses (dB); `a_*`, `c_*` give the elevation-dependent shadowing spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvParams {
    pub phi: f64,
    pub psi: f64,
    pub mu_los: f64,
    pub mu_nlos: f64,
    pub a_los: f64,
    pub a_nlos: f64,
    pub c_los: f64,
    pub c_nlos: f64,
}

impl EnvParams {
    pub fn is_valid(&self) -> bool {
        let pos = [self.phi, self.psi, self.a_los, self.a_nlos, self.c_los, self.c_nlos];
        pos.iter().all(|v| v.is_finite() && *v > 0.0)
            && self.mu_los.is_finite()
            && self.mu_nlos.is_finite()
            && self.mu_los >= 0.0
            && self.mu_nlos >= 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvPreset {
    HighRise,
    DenseUrban,
    Urban,
    SubUrban,
}

impl EnvPreset {
    pub const ALL: [EnvPreset; 4] = [
        EnvPreset::HighRise,
        EnvPreset::DenseUrban,
        EnvPreset::Urban,
        EnvPreset::SubUrban,
    ];

    pub fn params(self) -> EnvParams {
        match self {
            EnvPreset::HighRise => EnvParams {
                phi: 27.23,
                psi: 0.08,
                mu_los: 1.5,
                mu_nlos: 29.0,
                a_los: 7.37,
                a_nlos: 37.08,
                c_los: 0.03,
                c_nlos: 0.03,
            },
            EnvPreset::DenseUrban => EnvParams {
                phi: 12.08,
                psi: 0.11,
                mu_los: 1.0,
                mu_nlos: 20.0,
                a_los: 8.96,
                a_nlos: 35.97,
                c_los: 0.04,
                c_nlos: 0.04,
            },
            EnvPreset::Urban => EnvParams {
                phi: 9.61,
                psi: 0.16,
                mu_los: 0.6,
                mu_nlos: 17.0,
                a_los: 10.39,
                a_nlos: 29.6,
                c_los: 0.05,
                c_nlos: 0.03,
            },
            EnvPreset::SubUrban => EnvParams {
                phi: 4.88,
                psi: 0.43,
                mu_los: 0.0,
                mu_nlos: 18.0,
                a_los: 11.25,
                a_nlos: 32.17,
                c_los: 0.06,
                c_nlos: 0.03,
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EnvPreset::HighRise => "highrise",
            EnvPreset::DenseUrban => "denseurban",
            EnvPreset::Urban => "urban",
            EnvPreset::SubUrban => "suburban",
        }
    }
}

impl fmt::Display for EnvPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvPreset {
    type Err = ChannelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EnvPreset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| ChannelError::UnknownPreset(s.into()))
    }
}

/// Directional UAV antenna with main-lobe gain `2.6 / w^2` and side-lobe
/// gain one hundredth of that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern {
    beamwidth: f64,
    gain_main: f64,
    gain_side: f64,
}

impl AntennaPattern {
    pub fn new(beamwidth: f64) -> Self {
        assert!(
            beamwidth > 0.0 && beamwidth < PI,
            "beamwidth must lie in (0, pi), got {beamwidth}"
        );
        let gain_main = 2.6 / (beamwidth * beamwidth);
        Self {
            beamwidth,
            gain_main,
            gain_side: gain_main / 100.0,
        }
    }

    pub fn beamwidth(&self) -> f64 {
        self.beamwidth
    }

    pub fn gain_main(&self) -> f64 {
        self.gain_main
    }

    pub fn gain_side(&self) -> f64 {
        self.gain_side
    }

    /// `tan(pi/2 - w/2)`: a user is in the main lobe iff
    /// `horizontal_dist * cone_slope < height`.
    pub fn cone_slope(&self) -> f64 {
        libm::tan(PI / 2.0 - self.beamwidth / 2.0)
    }

    /// Largest horizontal distance still inside the main lobe (exclusive).
    pub fn main_lobe_radius(&self, height: f64) -> f64 {
        height / self.cone_slope()
    }
}

/// UAV-to-user geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    pub horizontal_dist: f64,
    pub height: f64,
    pub dist_3d: f64,
    pub elevation_deg: f64,
}

impl LinkGeometry {
    pub fn new(uav: [f64; 3], user: [f64; 2]) -> Result<Self, ChannelError> {
        if !uav.iter().chain(user.iter()).all(|v| v.is_finite()) {
            return Err(ChannelError::NonFiniteGeometry);
        }
        let height = uav[2];
        if height <= 0.0 {
            return Err(ChannelError::NonPositiveHeight(height));
        }
        let horizontal_dist = libm::hypot(uav[0] - user[0], uav[1] - user[1]);
        Ok(Self {
            horizontal_dist,
            height,
            dist_3d: libm::hypot(height, horizontal_dist),
            elevation_deg: elevation_from(height, horizontal_dist),
        })
    }
}

fn elevation_from(height: f64, horizontal_dist: f64) -> f64 {
    if horizontal_dist == 0.0 {
        90.0
    } else {
        libm::atan(height / horizontal_dist).to_degrees()
    }
}

/// Elevation of the UAV seen from the user, in degrees, in (0, 90].
pub fn elevation_angle_deg(uav: [f64; 3], user: [f64; 2]) -> f64 {
    elevation_from(uav[2], libm::hypot(uav[0] - user[0], uav[1] - user[1]))
}

/// Probability that the link is line-of-sight at the given elevation.
pub fn los_probability(env: &EnvParams, elevation_deg: f64) -> f64 {
    1.0 / (1.0 + env.phi * libm::exp(-env.psi * (elevation_deg - env.phi)))
}

/// Standard deviation (dB) of the log-normal shadowing term.
pub fn shadowing_sigma_db(a: f64, c: f64, elevation_deg: f64) -> f64 {
    a * libm::exp(-c * elevation_deg)
}

pub fn antenna_gain(geom: &LinkGeometry, pattern: &AntennaPattern) -> f64 {
    if geom.horizontal_dist < pattern.main_lobe_radius(geom.height) {
        pattern.gain_main
    } else {
        pattern.gain_side
    }
}

/// Free-space path gain `(c0 / (4 pi d f_c))^2`.
pub fn free_space_gain(dist_3d: f64, carrier_hz: f64) -> f64 {
    let r = SPEED_OF_LIGHT / (4.0 * PI * dist_3d * carrier_hz);
    r * r
}

/// Large-scale state of a link for one coherence interval: the propagation
/// mode and the shadowing draw in dB. Shared by uplink and downlink.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LargeScale {
    pub is_los: bool,
    pub shadow_db: f64,
}

pub fn sample_large_scale<R: Rng + ?Sized>(
    env: &EnvParams,
    geom: &LinkGeometry,
    rng: &mut R,
) -> LargeScale {
    let p_los = los_probability(env, geom.elevation_deg);
    let is_los = rng.random::<f64>() < p_los;
    let (mu, a, c) = if is_los {
        (env.mu_los, env.a_los, env.c_los)
    } else {
        (env.mu_nlos, env.a_nlos, env.c_nlos)
    };
    let sigma = shadowing_sigma_db(a, c, geom.elevation_deg);
    let z: f64 = StandardNormal.sample(rng);
    LargeScale {
        is_los,
        shadow_db: mu + sigma * z,
    }
}

/// Small-scale fading power gain with unit mean.
pub fn sample_fading<R: Rng + ?Sized>(is_los: bool, rng: &mut R) -> f64 {
    if is_los {
        // Shape m, scale 1/m: mean 1, variance 1/m.
        Gamma::new(NAKAGAMI_M, 1.0 / NAKAGAMI_M)
            .expect("valid gamma parameters")
            .sample(rng)
    } else {
        Exp1.sample(rng)
    }
}

/// One realization of a UAV-user link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkRealization {
    pub is_los: bool,
    /// Shadowing as an attenuation factor, `10^(U/10)`.
    pub shadow_gain: f64,
    pub fading_gain: f64,
    pub antenna_gain: f64,
    pub path_gain: f64,
    pub total_gain: f64,
}

impl LinkRealization {
    pub fn assemble(
        large: LargeScale,
        fading_gain: f64,
        geom: &LinkGeometry,
        pattern: &AntennaPattern,
        carrier_hz: f64,
    ) -> Self {
        let shadow_gain = libm::pow(10.0, large.shadow_db / 10.0);
        let antenna = antenna_gain(geom, pattern);
        let path_gain = free_space_gain(geom.dist_3d, carrier_hz);
        Self {
            is_los: large.is_los,
            shadow_gain,
            fading_gain,
            antenna_gain: antenna,
            path_gain,
            total_gain: antenna * path_gain * fading_gain / shadow_gain,
        }
    }
}

/// Draws a complete link: mode, shadowing and fading.
pub fn sample_link<R: Rng + ?Sized>(
    env: &EnvParams,
    geom: &LinkGeometry,
    pattern: &AntennaPattern,
    carrier_hz: f64,
    rng: &mut R,
) -> Result<LinkRealization, ChannelError> {
    let finite = [geom.horizontal_dist, geom.height, geom.dist_3d, geom.elevation_deg]
        .iter()
        .all(|v| v.is_finite());
    if !finite {
        return Err(ChannelError::NonFiniteGeometry);
    }
    let large = sample_large_scale(env, geom, rng);
    let fading = sample_fading(large.is_los, rng);
    Ok(LinkRealization::assemble(large, fading, geom, pattern, carrier_hz))
}

/// Received pilot power at the UAV.
pub fn rss(link: &LinkRealization, pilot_power: f64) -> f64 {
    pilot_power * link.total_gain
}

/// Downlink rate of one user under equal time division among `num_users`,
/// each slot transmitted at `total_power / num_users`.
pub fn per_user_rate(
    total_gain: f64,
    total_power: f64,
    num_users: usize,
    noise_power: f64,
    bandwidth_hz: f64,
) -> f64 {
    let k = num_users as f64;
    let snr = (total_power / k) * total_gain / noise_power;
    (bandwidth_hz / k) * libm::log2(1.0 + snr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{stream, StreamId};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn elevation_examples() {
        assert_relative_eq!(elevation_angle_deg([0.0, 0.0, 100.0], [100.0, 0.0]), 45.0, epsilon = 1e-12);
        assert_eq!(elevation_angle_deg([0.0, 0.0, 100.0], [0.0, 0.0]), 90.0);
        let user = [100.0 * libm::sqrt(3.0), 0.0];
        assert_relative_eq!(elevation_angle_deg([0.0, 0.0, 100.0], user), 30.0, epsilon = 1e-12);
    }

    #[test]
    fn los_examples() {
        let hr = EnvPreset::HighRise.params();
        assert_relative_eq!(los_probability(&hr, 90.0), 0.847_778_240_792_489_6, max_relative = 1e-12);
        let su = EnvPreset::SubUrban.params();
        assert!((1.0 - los_probability(&su, 90.0)).abs() < 1e-15);
        for p in EnvPreset::ALL {
            let env = p.params();
            assert_relative_eq!(los_probability(&env, env.phi), 1.0 / (1.0 + env.phi), max_relative = 1e-15);
        }
    }

    #[test]
    fn shadowing_examples() {
        assert_relative_eq!(shadowing_sigma_db(7.37, 0.03, 90.0), 0.495_304_628_891_955_8, max_relative = 1e-12);
        assert_eq!(shadowing_sigma_db(3.3, 0.7, 0.0), 3.3);
        assert_relative_eq!(shadowing_sigma_db(11.25, 0.06, 45.0), 0.756_062_018_322_184_9, max_relative = 1e-12);
    }

    #[test]
    fn antenna_examples() {
        let pat = AntennaPattern::new(PI / 3.0);
        assert_relative_eq!(pat.gain_main(), 2.370_915_697_230_704, max_relative = 1e-12);
        assert_relative_eq!(pat.gain_side(), pat.gain_main() / 100.0);
        let inside = LinkGeometry::new([0.0, 0.0, 100.0], [50.0, 0.0]).unwrap();
        let outside = LinkGeometry::new([0.0, 0.0, 100.0], [60.0, 0.0]).unwrap();
        let under = LinkGeometry::new([0.0, 0.0, 100.0], [0.0, 0.0]).unwrap();
        assert_eq!(antenna_gain(&inside, &pat), pat.gain_main());
        assert_eq!(antenna_gain(&outside, &pat), pat.gain_side());
        assert_eq!(antenna_gain(&under, &pat), pat.gain_main());
    }

    #[test]
    fn antenna_boundary_at_h_over_sqrt3() {
        let pat = AntennaPattern::new(PI / 3.0);
        let h = 100.0;
        let edge = h / libm::sqrt(3.0);
        assert!((pat.main_lobe_radius(h) - edge).abs() <= 2.0 * f64::EPSILON * edge);
        let just_in = LinkGeometry::new([0.0, 0.0, h], [edge * (1.0 - 1e-12), 0.0]).unwrap();
        let just_out = LinkGeometry::new([0.0, 0.0, h], [edge * (1.0 + 1e-12), 0.0]).unwrap();
        assert_eq!(antenna_gain(&just_in, &pat), pat.gain_main());
        assert_eq!(antenna_gain(&just_out, &pat), pat.gain_side());
    }

    #[test]
    fn geometry_rejects_bad_input() {
        assert_eq!(
            LinkGeometry::new([f64::NAN, 0.0, 10.0], [0.0, 0.0]),
            Err(ChannelError::NonFiniteGeometry)
        );
        assert!(matches!(
            LinkGeometry::new([0.0, 0.0, 0.0], [1.0, 0.0]),
            Err(ChannelError::NonPositiveHeight(_))
        ));
        let mut g = LinkGeometry::new([0.0, 0.0, 10.0], [3.0, 4.0]).unwrap();
        assert_relative_eq!(g.dist_3d, libm::sqrt(125.0));
        g.dist_3d = f64::INFINITY;
        let mut rng = stream(1, StreamId::Channel);
        let env = EnvPreset::Urban.params();
        let pat = AntennaPattern::new(PI / 3.0);
        assert!(sample_link(&env, &g, &pat, 2e9, &mut rng).is_err());
    }

    #[test]
    fn rss_and_rate() {
        let geom = LinkGeometry::new([0.0, 0.0, 100.0], [0.0, 0.0]).unwrap();
        let pat = AntennaPattern::new(PI / 3.0);
        let large = LargeScale { is_los: true, shadow_db: 0.0 };
        let mut link = LinkRealization::assemble(large, 1.0, &geom, &pat, 2e9);
        link.total_gain = 1.0;
        assert_eq!(rss(&link, 1.0), 1.0);
        link.total_gain = 1e-10;
        assert_eq!(rss(&link, 1.0), 1e-10);
        assert_eq!(rss(&link, 2.0), 2.0 * rss(&link, 1.0));

        assert_relative_eq!(per_user_rate(1.0, 1.0, 1, 1.0, 1.0), 1.0);
        assert_relative_eq!(per_user_rate(255.0, 2.0, 2, 1.0, 1.0), 4.0);
        assert!(per_user_rate(1e-300, 1.0, 3, 1.0, 1.0) < 1e-299);
    }

    #[test]
    fn total_gain_assembly() {
        let geom = LinkGeometry::new([0.0, 0.0, 120.0], [300.0, 40.0]).unwrap();
        let pat = AntennaPattern::new(PI / 3.0);
        let large = LargeScale { is_los: false, shadow_db: 20.0 };
        let link = LinkRealization::assemble(large, 0.5, &geom, &pat, 2e9);
        assert_relative_eq!(link.shadow_gain, 100.0, max_relative = 1e-14);
        let expect = link.antenna_gain * free_space_gain(geom.dist_3d, 2e9) * 0.5 / 100.0;
        assert_relative_eq!(link.total_gain, expect, max_relative = 1e-14);
        assert!(link.total_gain > 0.0);
    }

    #[test]
    fn sample_link_reproducible() {
        let env = EnvPreset::HighRise.params();
        let geom = LinkGeometry::new([10.0, 0.0, 80.0], [200.0, 30.0]).unwrap();
        let pat = AntennaPattern::new(PI / 3.0);
        let draw = |seed| {
            let mut rng = stream(seed, StreamId::Channel);
            (0..50)
                .map(|_| sample_link(&env, &geom, &pat, 2e9, &mut rng).unwrap().total_gain.to_bits())
                .collect::<alloc::vec::Vec<_>>()
        };
        assert_eq!(draw(3), draw(3));
        assert_ne!(draw(3), draw(4));
    }

    #[test]
    fn nlos_shadow_mean_highrise_overhead() {
        let env = EnvPreset::HighRise.params();
        let geom = LinkGeometry::new([0.0, 0.0, 100.0], [0.0, 0.0]).unwrap();
        let mut rng = stream(11, StreamId::Channel);
        let (mut sum, mut n) = (0.0, 0usize);
        while n < 1_000_000 {
            let ls = sample_large_scale(&env, &geom, &mut rng);
            if !ls.is_los {
                sum += ls.shadow_db;
                n += 1;
            }
        }
        assert!((sum / n as f64 - 29.0).abs() < 0.1);
    }

    #[test]
    fn preset_names_round_trip() {
        for p in EnvPreset::ALL {
            assert_eq!(p.name().parse::<EnvPreset>().unwrap(), p);
            assert!(p.params().is_valid());
        }
        assert!("mars".parse::<EnvPreset>().is_err());
    }

    proptest! {
        #[test]
        fn rate_monotone(g1 in 1e-18f64..1e-8, scale in 1.01f64..100.0, k in 1usize..20) {
            let lo = per_user_rate(g1, 1.0, k, 1e-20, 1e6);
            let hi = per_user_rate(g1 * scale, 1.0, k, 1e-20, 1e6);
            prop_assert!(hi > lo);
            prop_assert!(per_user_rate(g1, 1.0, k + 1, 1e-20, 1e6) < lo);
        }
    }
}
