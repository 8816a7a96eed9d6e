//! Rewards-to-go and generalized advantage estimation.

use alloc::vec;
use alloc::vec::Vec;

/// Backward recursion over a batch of contiguous episodes:
///
/// ```text
/// R[t] = r_t + gamma (1 - d_t) R[t+1]
/// delta_t = r_t + gamma (1 - d_t) V(s_{t+1}) - V(s_t)
/// A[t] = delta_t + gamma lambda (1 - d_t) A[t+1]
/// ```
///
/// `values[t] = V(s_t)` and `next_values[t] = V(s_{t+1})`. When the last
/// transition is not terminal (episode cut by the batch), `R[N]` is
/// bootstrapped with `next_values[N-1]` and `A[N] = 0`.
pub fn compute_returns_and_gae(
    rewards: &[f64],
    dones: &[bool],
    values: &[f64],
    next_values: &[f64],
    gamma: f64,
    lambda: f64,
) -> (Vec<f64>, Vec<f64>) {
    let n = rewards.len();
    assert!(dones.len() == n && values.len() == n && next_values.len() == n, "gae: length mismatch");
    let mut returns = vec![0.0; n];
    let mut advantages = vec![0.0; n];
    let mut next_return = next_values.last().copied().unwrap_or(0.0);
    let mut next_adv = 0.0;
    for t in (0..n).rev() {
        let live = if dones[t] { 0.0 } else { 1.0 };
        returns[t] = rewards[t] + gamma * live * next_return;
        let delta = rewards[t] + gamma * live * next_values[t] - values[t];
        advantages[t] = delta + gamma * lambda * live * next_adv;
        next_return = returns[t];
        next_adv = advantages[t];
    }
    (returns, advantages)
}

/// Shifts and scales to zero mean and unit (population) variance. A batch
/// with no spread maps to all zeros.
pub fn normalize_advantages(adv: &mut [f64]) {
    let n = adv.len();
    if n == 0 {
        return;
    }
    let mean = adv.iter().sum::<f64>() / n as f64;
    let var = adv.iter().map(|a| (a - mean) * (a - mean)).sum::<f64>() / n as f64;
    let std = libm::sqrt(var);
    if !(std > 1e-10 * (1.0 + mean.abs())) {
        adv.fill(0.0);
        return;
    }
    adv.iter_mut().for_each(|a| *a = (*a - mean) / std);
}
