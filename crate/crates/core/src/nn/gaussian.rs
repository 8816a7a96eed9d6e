//! Diagonal Gaussian action distribution.
//!
//! Slice-level functions take `(mean, log_std)` rows so batched callers can
//! work on network outputs directly; [`DiagGaussian`] is the owned wrapper.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

/// Clamps a raw log-std. The flag is false where the clamp is active, i.e.
/// where the gradient w.r.t. the raw value is zero.
pub fn clamp_log_std(raw: f64) -> (f64, bool) {
    let c = raw.clamp(LOG_STD_MIN, LOG_STD_MAX);
    (c, c == raw)
}

fn half_log_2pi() -> f64 {
    0.5 * libm::log(2.0 * PI)
}

pub fn log_prob_row(mean: &[f64], log_std: &[f64], action: &[f64]) -> f64 {
    mean.iter()
        .zip(log_std)
        .zip(action)
        .map(|((m, ls), a)| {
            let z = (a - m) * libm::exp(-ls);
            -0.5 * z * z - ls - half_log_2pi()
        })
        .sum()
}

/// Gradient of `log_prob_row` w.r.t. mean and log-std, written into the
/// output slices.
pub fn log_prob_grad_row(mean: &[f64], log_std: &[f64], action: &[f64], d_mean: &mut [f64], d_log_std: &mut [f64]) {
    for i in 0..mean.len() {
        let inv_var = libm::exp(-2.0 * log_std[i]);
        let diff = action[i] - mean[i];
        d_mean[i] = diff * inv_var;
        d_log_std[i] = diff * diff * inv_var - 1.0;
    }
}

/// `KL(p || q)` for one pair of diagonal Gaussians.
pub fn kl_row(p_mean: &[f64], p_log_std: &[f64], q_mean: &[f64], q_log_std: &[f64]) -> f64 {
    (0..p_mean.len())
        .map(|i| {
            let var_ratio = libm::exp(2.0 * (p_log_std[i] - q_log_std[i]));
            let dm = p_mean[i] - q_mean[i];
            let q_var = libm::exp(2.0 * q_log_std[i]);
            q_log_std[i] - p_log_std[i] + 0.5 * (var_ratio + dm * dm / q_var) - 0.5
        })
        .sum()
}

/// Gradient of `KL(p || q)` w.r.t. the parameters of `q`.
pub fn kl_grad_q_row(
    p_mean: &[f64],
    p_log_std: &[f64],
    q_mean: &[f64],
    q_log_std: &[f64],
    d_mean: &mut [f64],
    d_log_std: &mut [f64],
) {
    for i in 0..p_mean.len() {
        let inv_q_var = libm::exp(-2.0 * q_log_std[i]);
        let dm = q_mean[i] - p_mean[i];
        let p_var = libm::exp(2.0 * p_log_std[i]);
        d_mean[i] = dm * inv_q_var;
        d_log_std[i] = 1.0 - (p_var + dm * dm) * inv_q_var;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagGaussian {
    mean: Vec<f64>,
    log_std: Vec<f64>,
}

impl DiagGaussian {
    /// Builds the distribution, clamping `log_std` into `[-20, 2]`.
    pub fn new(mean: Vec<f64>, log_std: Vec<f64>) -> Self {
        assert_eq!(mean.len(), log_std.len(), "mean/log_std length");
        let log_std = log_std.into_iter().map(|v| clamp_log_std(v).0).collect();
        Self { mean, log_std }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn log_std(&self) -> &[f64] {
        &self.log_std
    }

    pub fn std(&self) -> Vec<f64> {
        self.log_std.iter().map(|v| libm::exp(*v)).collect()
    }

    pub fn log_prob(&self, action: &[f64]) -> f64 {
        log_prob_row(&self.mean, &self.log_std, action)
    }

    pub fn entropy(&self) -> f64 {
        self.log_std.iter().map(|ls| ls + 0.5 + half_log_2pi()).sum()
    }

    pub fn kl(&self, other: &DiagGaussian) -> f64 {
        kl_row(&self.mean, &self.log_std, &other.mean, &other.log_std)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.mean
            .iter()
            .zip(&self.log_std)
            .map(|(m, ls)| {
                let z: f64 = StandardNormal.sample(rng);
                m + libm::exp(*ls) * z
            })
            .collect()
    }
}

pub fn log_prob(dist: &DiagGaussian, action: &[f64]) -> f64 {
    dist.log_prob(action)
}

pub fn kl(p: &DiagGaussian, q: &DiagGaussian) -> f64 {
    p.kl(q)
}
