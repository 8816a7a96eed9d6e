//! Value-network regression onto rewards-to-go with Adam.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::nn::NnError;
use crate::trpo::policy::ValueFunction;
use crate::trpo::TrpoConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: u32,
}

impl Adam {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; num_params], v: vec![0.0; num_params], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let bc1 = 1.0 - libm::pow(self.beta1, self.t as f64);
        let bc2 = 1.0 - libm::pow(self.beta2, self.t as f64);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (libm::sqrt(v_hat) + self.eps);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueFit {
    pub loss_before: f64,
    pub loss_after: f64,
    /// The fit increased the full-batch loss and was rolled back.
    pub reverted: bool,
}

/// Minibatch Adam on the mean squared error to `targets` for
/// `cfg.value_epochs` shuffled passes. If the full-batch loss ends up
/// higher than before, the previous parameters are kept.
pub fn update_value<R: Rng + ?Sized>(
    value: &mut ValueFunction,
    opt: &mut Adam,
    states: &[f64],
    targets: &[f64],
    cfg: &TrpoConfig,
    rng: &mut R,
) -> Result<ValueFit, NnError> {
    let n = targets.len();
    let s = value.net().input_dim();
    let before = value.params().to_vec();
    let loss_before = value.mse(&before, states, targets)?;
    let mut params = before.clone();
    let mut order: Vec<usize> = (0..n).collect();
    let mb = cfg.value_minibatch.max(1);
    let mut xs = Vec::with_capacity(mb * s);
    let mut ys = Vec::with_capacity(mb);
    for _ in 0..cfg.value_epochs {
        order.shuffle(rng);
        for chunk in order.chunks(mb) {
            xs.clear();
            ys.clear();
            for &i in chunk {
                xs.extend_from_slice(&states[i * s..(i + 1) * s]);
                ys.push(targets[i]);
            }
            let (_, grad) = value.mse_and_grad(&params, &xs, &ys)?;
            opt.step(&mut params, &grad);
        }
    }
    let loss_after = value.mse(&params, states, targets)?;
    if loss_after.is_finite() && loss_after <= loss_before {
        value.set_params(params)?;
        Ok(ValueFit { loss_before, loss_after, reverted: false })
    } else {
        log::warn!("value fit raised loss {loss_before:.4e} -> {loss_after:.4e}; keeping previous parameters");
        Ok(ValueFit { loss_before, loss_after: loss_before, reverted: true })
    }
}
