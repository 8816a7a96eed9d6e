//! Policy gradient, surrogate objective and the KL-constrained line search.

use alloc::vec::Vec;

use crate::nn::linalg::{axpy, norm};
use crate::nn::NnError;
use crate::trpo::batch::Batch;
use crate::trpo::policy::{Policy, PolicyEval};
use crate::trpo::TrpoConfig;

/// `(1/N) sum_t grad log pi(a_t | s_t) * A_t` at the point `eval` was
/// computed for (the current parameters).
pub fn policy_gradient(policy: &Policy, eval: &PolicyEval, batch: &Batch) -> Result<Vec<f64>, NnError> {
    let inv_n = 1.0 / batch.len() as f64;
    let weights: Vec<f64> = batch.advantages.iter().map(|a| a * inv_n).collect();
    policy.weighted_log_prob_grad(policy.params(), eval, &batch.actions, &weights)
}

/// Mean over the batch of `pi_new(a|s) / pi_old(a|s) * A`.
pub fn surrogate(policy: &Policy, eval: &PolicyEval, batch: &Batch) -> f64 {
    let lp = policy.log_probs(eval, &batch.actions);
    let total: f64 = lp
        .iter()
        .zip(&batch.log_probs_old)
        .zip(&batch.advantages)
        .map(|((new, old), a)| libm::exp(new - old) * a)
        .sum();
    total / batch.len() as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptedStep {
    pub params: Vec<f64>,
    /// Backtracking exponent `j`; the step taken is `alpha^j` times the full step.
    pub backtracks: usize,
    pub kl: f64,
    pub improvement: f64,
    pub step_norm: f64,
    pub full_step_norm: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LineSearchOutcome {
    Accepted(AcceptedStep),
    Rejected { attempts: usize },
}

/// Scales the search direction `x` to the trust-region boundary of the
/// quadratic model, `sqrt(2 delta / x^T F x) x`, then backtracks by
/// `alpha^j` for `j = 0..=max_backtracks` until the measured batch KL is
/// within `delta_kl` and the surrogate strictly improves.
///
/// `x_fx` is `x^T F x` with the same damped operator used by CG.
pub fn line_search(
    policy: &Policy,
    old_eval: &PolicyEval,
    batch: &Batch,
    x: &[f64],
    x_fx: f64,
    cfg: &TrpoConfig,
) -> Result<LineSearchOutcome, NnError> {
    let scale = 2.0 * cfg.delta_kl / x_fx;
    if !(x_fx > 0.0 && scale.is_finite()) || x.iter().all(|v| *v == 0.0) {
        return Ok(LineSearchOutcome::Rejected { attempts: 0 });
    }
    let full_step_norm = libm::sqrt(scale) * norm(x);
    let base = surrogate(policy, old_eval, batch);
    let n = batch.len();
    let mut frac = 1.0;
    for j in 0..=cfg.max_backtracks {
        let coeff = frac * libm::sqrt(scale);
        let mut candidate = policy.params().to_vec();
        axpy(coeff, x, &mut candidate);
        let eval = policy.evaluate_with(&candidate, &batch.states, n)?;
        let kl = policy.mean_kl(old_eval, &eval);
        let improvement = surrogate(policy, &eval, batch) - base;
        if kl.is_finite() && kl <= cfg.delta_kl && improvement > 0.0 {
            return Ok(LineSearchOutcome::Accepted(AcceptedStep {
                params: candidate,
                backtracks: j,
                kl,
                improvement,
                step_norm: frac * full_step_norm,
                full_step_norm,
            }));
        }
        frac *= cfg.backtrack_alpha;
    }
    Ok(LineSearchOutcome::Rejected { attempts: cfg.max_backtracks + 1 })
}
