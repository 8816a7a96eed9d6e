//! Gaussian policy and state-value networks over flat parameter vectors.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::nn::gaussian::{self, clamp_log_std, DiagGaussian};
use crate::nn::{Activations, Mlp, MlpSpec, NnError};

/// Network inputs are the per-user RSS-to-noise ratios in dB times this.
pub const OBS_SCALE: f64 = 0.01;

/// Initial bias of the log-std head.
pub const INIT_LOG_STD: f64 = -0.5;

/// Scale applied to the mean head at initialization.
pub const MEAN_HEAD_SCALE: f64 = 0.01;

pub fn scale_observation(obs_db: &[f64], out: &mut Vec<f64>) {
    out.extend(obs_db.iter().map(|v| v * OBS_SCALE));
}

/// Policy outputs over a batch of states.
#[derive(Debug, Clone)]
pub struct PolicyEval {
    pub acts: Activations,
    /// Clamped log-std, `batch x action_dim`.
    pub log_std: Vec<f64>,
    /// False where the log-std clamp is active.
    pub live: Vec<bool>,
}

impl PolicyEval {
    pub fn batch(&self) -> usize {
        self.acts.batch
    }

    pub fn mean(&self) -> &[f64] {
        &self.acts.heads[0]
    }

    pub fn row(&self, i: usize, dim: usize) -> (&[f64], &[f64]) {
        let r = i * dim..(i + 1) * dim;
        (&self.mean()[r.clone()], &self.log_std[r])
    }
}

#[derive(Debug, Clone)]
pub struct Policy {
    net: Mlp,
    params: Vec<f64>,
    action_dim: usize,
}

impl Policy {
    /// Two-headed network: head 0 is the mean, head 1 the log-std.
    pub fn new(spec: MlpSpec) -> Self {
        assert!(spec.heads.len() == 2 && spec.heads[0] == spec.heads[1], "policy needs two equal heads");
        let action_dim = spec.heads[0];
        let net = Mlp::new(spec);
        let params = vec![0.0; net.num_params()];
        Self { net, params, action_dim }
    }

    /// Fan-in initialization with the mean head scaled down and its bias set
    /// to `mean_bias`, and the log-std head bias set to [`INIT_LOG_STD`].
    pub fn init<R: Rng + ?Sized>(&mut self, rng: &mut R, mean_bias: &[f64]) {
        let mut p = self.net.init(rng);
        self.net.scale_head(&mut p, 0, MEAN_HEAD_SCALE);
        self.net.set_head_bias(&mut p, 0, mean_bias);
        self.net.set_head_bias(&mut p, 1, &vec![INIT_LOG_STD; self.action_dim]);
        self.params = p;
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<(), NnError> {
        if params.len() != self.net.num_params() {
            return Err(NnError::ShapeMismatch {
                what: "policy parameters",
                expected: self.net.num_params(),
                actual: params.len(),
            });
        }
        self.params = params;
        Ok(())
    }

    pub fn action_dim(&self) -> usize {
        self.action_dim
    }

    pub fn obs_dim(&self) -> usize {
        self.net.input_dim()
    }

    pub fn evaluate_with(&self, params: &[f64], states: &[f64], batch: usize) -> Result<PolicyEval, NnError> {
        let acts = self.net.forward(params, states, batch)?;
        let (log_std, live) = acts.heads[1].iter().map(|v| clamp_log_std(*v)).unzip();
        Ok(PolicyEval { acts, log_std, live })
    }

    pub fn evaluate(&self, states: &[f64], batch: usize) -> Result<PolicyEval, NnError> {
        self.evaluate_with(&self.params, states, batch)
    }

    pub fn distribution(&self, state: &[f64]) -> Result<DiagGaussian, NnError> {
        let acts = self.net.forward(&self.params, state, 1)?;
        Ok(DiagGaussian::new(acts.heads[0].clone(), acts.heads[1].clone()))
    }

    pub fn act<R: Rng + ?Sized>(&self, state: &[f64], rng: &mut R) -> Result<Vec<f64>, NnError> {
        Ok(self.distribution(state)?.sample(rng))
    }

    pub fn log_probs(&self, eval: &PolicyEval, actions: &[f64]) -> Vec<f64> {
        let b = self.action_dim;
        (0..eval.batch())
            .map(|i| {
                let (m, ls) = eval.row(i, b);
                gaussian::log_prob_row(m, ls, &actions[i * b..(i + 1) * b])
            })
            .collect()
    }

    /// Flat gradient of `sum_i w_i * log pi(a_i | s_i)` at the evaluated point.
    pub fn weighted_log_prob_grad(&self, params: &[f64], eval: &PolicyEval, actions: &[f64], weights: &[f64]) -> Result<Vec<f64>, NnError> {
        let b = self.action_dim;
        let n = eval.batch();
        let mut d_mean = vec![0.0; n * b];
        let mut d_ls = vec![0.0; n * b];
        for i in 0..n {
            let r = i * b..(i + 1) * b;
            let (m, ls) = eval.row(i, b);
            gaussian::log_prob_grad_row(m, ls, &actions[r.clone()], &mut d_mean[r.clone()], &mut d_ls[r.clone()]);
            for j in r {
                d_mean[j] *= weights[i];
                d_ls[j] *= if eval.live[j] { weights[i] } else { 0.0 };
            }
        }
        self.net.backward(params, &eval.acts, &[&d_mean, &d_ls])
    }

    /// Batch-mean `KL(old || new)`.
    pub fn mean_kl(&self, old: &PolicyEval, new: &PolicyEval) -> f64 {
        let b = self.action_dim;
        let n = old.batch();
        let total: f64 = (0..n)
            .map(|i| {
                let (pm, pl) = old.row(i, b);
                let (qm, ql) = new.row(i, b);
                gaussian::kl_row(pm, pl, qm, ql)
            })
            .sum();
        total / n as f64
    }

    /// Gradient of batch-mean `KL(old || pi_params)` w.r.t. `params`, where
    /// `new` is the evaluation at `params`.
    pub fn mean_kl_grad(&self, params: &[f64], old: &PolicyEval, new: &PolicyEval) -> Result<Vec<f64>, NnError> {
        let b = self.action_dim;
        let n = old.batch();
        let mut d_mean = vec![0.0; n * b];
        let mut d_ls = vec![0.0; n * b];
        let inv_n = 1.0 / n as f64;
        for i in 0..n {
            let r = i * b..(i + 1) * b;
            let (pm, pl) = old.row(i, b);
            let (qm, ql) = new.row(i, b);
            gaussian::kl_grad_q_row(pm, pl, qm, ql, &mut d_mean[r.clone()], &mut d_ls[r.clone()]);
            for j in r {
                d_mean[j] *= inv_n;
                d_ls[j] *= if new.live[j] { inv_n } else { 0.0 };
            }
        }
        self.net.backward(params, &new.acts, &[&d_mean, &d_ls])
    }

    /// Hessian-vector product of the batch-mean KL at the evaluated point,
    /// plus `damping * v`. Uses the Gauss-Newton form `J^T M J v`, exact
    /// here because the KL gradient vanishes at `theta = theta_k`.
    pub fn fisher_vector_product(&self, eval: &PolicyEval, v: &[f64], damping: f64) -> Result<Vec<f64>, NnError> {
        let n = eval.batch();
        let inv_n = 1.0 / n as f64;
        let tangents = self.net.jvp(&self.params, &eval.acts, v)?;
        let mut g_mean = tangents[0].clone();
        let mut g_ls = tangents[1].clone();
        for j in 0..g_mean.len() {
            g_mean[j] *= libm::exp(-2.0 * eval.log_std[j]) * inv_n;
            g_ls[j] *= if eval.live[j] { 2.0 * inv_n } else { 0.0 };
        }
        let mut out = self.net.backward(&self.params, &eval.acts, &[&g_mean, &g_ls])?;
        for (o, vi) in out.iter_mut().zip(v) {
            *o += damping * vi;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone)]
pub struct ValueFunction {
    net: Mlp,
    params: Vec<f64>,
}

impl ValueFunction {
    pub fn new(spec: MlpSpec) -> Self {
        assert!(spec.heads == [1], "value net needs a single scalar head");
        let net = Mlp::new(spec);
        let params = vec![0.0; net.num_params()];
        Self { net, params }
    }

    pub fn init<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.params = self.net.init(rng);
    }

    pub fn net(&self) -> &Mlp {
        &self.net
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn set_params(&mut self, params: Vec<f64>) -> Result<(), NnError> {
        if params.len() != self.net.num_params() {
            return Err(NnError::ShapeMismatch {
                what: "value parameters",
                expected: self.net.num_params(),
                actual: params.len(),
            });
        }
        self.params = params;
        Ok(())
    }

    pub fn predict_with(&self, params: &[f64], states: &[f64], batch: usize) -> Result<Vec<f64>, NnError> {
        Ok(self.net.forward(params, states, batch)?.heads.swap_remove(0))
    }

    pub fn predict(&self, states: &[f64], batch: usize) -> Result<Vec<f64>, NnError> {
        self.predict_with(&self.params, states, batch)
    }

    /// Mean squared error against `targets` and its flat gradient.
    pub fn mse_and_grad(&self, params: &[f64], states: &[f64], targets: &[f64]) -> Result<(f64, Vec<f64>), NnError> {
        let n = targets.len();
        let acts = self.net.forward(params, states, n)?;
        let pred = &acts.heads[0];
        let inv_n = 1.0 / n as f64;
        let mut loss = 0.0;
        let d: Vec<f64> = pred
            .iter()
            .zip(targets)
            .map(|(p, t)| {
                let e = p - t;
                loss += e * e;
                2.0 * e * inv_n
            })
            .collect();
        let grad = self.net.backward(params, &acts, &[&d])?;
        Ok((loss * inv_n, grad))
    }

    pub fn mse(&self, params: &[f64], states: &[f64], targets: &[f64]) -> Result<f64, NnError> {
        let pred = self.predict_with(params, states, targets.len())?;
        Ok(mse(&pred, targets))
    }
}

pub fn mse(pred: &[f64], targets: &[f64]) -> f64 {
    let n = targets.len().max(1) as f64;
    pred.iter().zip(targets).map(|(p, t)| (p - t) * (p - t)).sum::<f64>() / n
}
