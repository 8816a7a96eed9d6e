//! Dense tanh network with a shared trunk and one or more linear heads.
//!
//! Parameters live in a single flat `[f64]` so that trust-region updates
//! can treat them as one vector. Per layer the layout is the `in x out`
//! row-major weight matrix followed by the `out` bias; trunk layers come
//! first, then the heads in order.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use thiserror::Error;

use super::linalg::gemm;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NnError {
    #[error("shape mismatch: expected {expected}, got {actual} ({what})")]
    ShapeMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
}

fn check(what: &'static str, expected: usize, actual: usize) -> Result<(), NnError> {
    if expected == actual {
        Ok(())
    } else {
        Err(NnError::ShapeMismatch { what, expected, actual })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MlpSpec {
    pub input_dim: usize,
    /// Tanh trunk widths.
    pub hidden: Vec<usize>,
    /// Output width of each linear head.
    pub heads: Vec<usize>,
}

impl MlpSpec {
    /// Trunk `s -> 400 -> 300` with mean and log-std heads of width `b`.
    pub fn policy(s: usize, b: usize) -> Self {
        Self { input_dim: s, hidden: vec![400, 300], heads: vec![b, b] }
    }

    /// Trunk `s -> 400 -> 300` with a scalar head.
    pub fn value(s: usize) -> Self {
        Self { input_dim: s, hidden: vec![400, 300], heads: vec![1] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LayerShape {
    pub input: usize,
    pub output: usize,
    pub offset: usize,
}

impl LayerShape {
    pub fn weights_len(&self) -> usize {
        self.input * self.output
    }

    pub fn len(&self) -> usize {
        self.weights_len() + self.output
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn weights<'a>(&self, flat: &'a [f64]) -> &'a [f64] {
        &flat[self.offset..self.offset + self.weights_len()]
    }

    fn bias<'a>(&self, flat: &'a [f64]) -> &'a [f64] {
        &flat[self.offset + self.weights_len()..self.offset + self.len()]
    }

    fn split_mut<'a>(&self, flat: &'a mut [f64]) -> (&'a mut [f64], &'a mut [f64]) {
        flat[self.offset..self.offset + self.len()].split_at_mut(self.weights_len())
    }
}

/// Unpacked parameters of one layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerParams {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Cached activations of a batched forward pass.
#[derive(Debug, Clone)]
pub struct Activations {
    pub batch: usize,
    /// `trunk[0]` is the input; `trunk[i]` the tanh output of trunk layer `i`.
    pub trunk: Vec<Vec<f64>>,
    pub heads: Vec<Vec<f64>>,
}

impl Activations {
    fn features(&self) -> &[f64] {
        self.trunk.last().expect("trunk holds the input")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mlp {
    spec: MlpSpec,
    trunk: Vec<LayerShape>,
    heads: Vec<LayerShape>,
    num_params: usize,
}

impl Mlp {
    pub fn new(spec: MlpSpec) -> Self {
        let mut offset = 0;
        let mut layer = |input, output| {
            let shape = LayerShape { input, output, offset };
            offset += shape.len();
            shape
        };
        let mut width = spec.input_dim;
        let mut trunk = Vec::with_capacity(spec.hidden.len());
        for &h in &spec.hidden {
            trunk.push(layer(width, h));
            width = h;
        }
        let heads = spec.heads.iter().map(|&h| layer(width, h)).collect();
        Self { spec, trunk, heads, num_params: offset }
    }

    pub fn spec(&self) -> &MlpSpec {
        &self.spec
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn input_dim(&self) -> usize {
        self.spec.input_dim
    }

    /// All layers in flat-vector order: trunk then heads.
    pub fn layers(&self) -> impl Iterator<Item = &LayerShape> {
        self.trunk.iter().chain(self.heads.iter())
    }

    pub fn head_shape(&self, head: usize) -> &LayerShape {
        &self.heads[head]
    }

    pub fn unflatten(&self, flat: &[f64]) -> Result<Vec<LayerParams>, NnError> {
        check("parameter vector", self.num_params, flat.len())?;
        Ok(self
            .layers()
            .map(|l| LayerParams { weights: l.weights(flat).to_vec(), bias: l.bias(flat).to_vec() })
            .collect())
    }

    pub fn flatten(&self, layers: &[LayerParams]) -> Result<Vec<f64>, NnError> {
        check("layer count", self.trunk.len() + self.heads.len(), layers.len())?;
        let mut flat = Vec::with_capacity(self.num_params);
        for (shape, p) in self.layers().zip(layers) {
            check("layer weights", shape.weights_len(), p.weights.len())?;
            check("layer bias", shape.output, p.bias.len())?;
            flat.extend_from_slice(&p.weights);
            flat.extend_from_slice(&p.bias);
        }
        Ok(flat)
    }

    /// Uniform fan-in initialization, `U(-1/sqrt(in), 1/sqrt(in))` for
    /// weights and biases of every layer.
    pub fn init<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut flat = vec![0.0; self.num_params];
        for l in self.layers() {
            let bound = 1.0 / libm::sqrt(l.input.max(1) as f64);
            for v in &mut flat[l.offset..l.offset + l.len()] {
                *v = rng.random_range(-bound..=bound);
            }
        }
        flat
    }

    /// Multiplies a head's weights and bias by `factor`.
    pub fn scale_head(&self, flat: &mut [f64], head: usize, factor: f64) {
        let (w, b) = self.heads[head].split_mut(flat);
        w.iter_mut().chain(b.iter_mut()).for_each(|v| *v *= factor);
    }

    pub fn set_head_bias(&self, flat: &mut [f64], head: usize, bias: &[f64]) {
        let (_, b) = self.heads[head].split_mut(flat);
        b.copy_from_slice(bias);
    }

    /// Batched forward pass over `batch` row-major inputs.
    pub fn forward(&self, params: &[f64], inputs: &[f64], batch: usize) -> Result<Activations, NnError> {
        check("parameter vector", self.num_params, params.len())?;
        check("input batch", batch * self.spec.input_dim, inputs.len())?;
        let mut trunk = Vec::with_capacity(self.trunk.len() + 1);
        trunk.push(inputs.to_vec());
        for l in &self.trunk {
            let mut out = affine(l, params, trunk.last().expect("non-empty"), batch);
            out.iter_mut().for_each(|v| *v = libm::tanh(*v));
            trunk.push(out);
        }
        let feat = trunk.last().expect("non-empty");
        let heads = self.heads.iter().map(|l| affine(l, params, feat, batch)).collect();
        Ok(Activations { batch, trunk, heads })
    }

    /// Reverse-mode gradient of a scalar loss given `d loss / d head_j` for
    /// every head (each `batch x head_dim`). Returns the flat gradient.
    pub fn backward(&self, params: &[f64], acts: &Activations, head_grads: &[&[f64]]) -> Result<Vec<f64>, NnError> {
        let mut grad = vec![0.0; self.num_params];
        self.backward_into(params, acts, head_grads, &mut grad)?;
        Ok(grad)
    }

    /// Like [`Mlp::backward`] but overwrites `grad`.
    pub fn backward_into(
        &self,
        params: &[f64],
        acts: &Activations,
        head_grads: &[&[f64]],
        grad: &mut [f64],
    ) -> Result<(), NnError> {
        check("parameter vector", self.num_params, params.len())?;
        check("gradient vector", self.num_params, grad.len())?;
        check("head gradient count", self.heads.len(), head_grads.len())?;
        check("cached trunk depth", self.trunk.len() + 1, acts.trunk.len())?;
        let n = acts.batch;
        let feat = acts.features();
        let width = feat.len() / n.max(1);
        let mut d_feat = vec![0.0; feat.len()];
        for (l, g) in self.heads.iter().zip(head_grads) {
            check("head gradient", n * l.output, g.len())?;
            param_grads(l, feat, g, n, grad);
            gemm(n, l.output, width, g, false, l.weights(params), true, 1.0, &mut d_feat);
        }
        let mut d_out = d_feat;
        for (i, l) in self.trunk.iter().enumerate().rev() {
            let out = &acts.trunk[i + 1];
            for (d, y) in d_out.iter_mut().zip(out) {
                *d *= 1.0 - y * y;
            }
            let input = &acts.trunk[i];
            param_grads(l, input, &d_out, n, grad);
            if i > 0 {
                let mut d_in = vec![0.0; input.len()];
                gemm(n, l.output, l.input, &d_out, false, l.weights(params), true, 0.0, &mut d_in);
                d_out = d_in;
            }
        }
        Ok(())
    }

    /// Forward-mode directional derivative of every head output along the
    /// parameter direction `tangent`, at the point cached in `acts`.
    pub fn jvp(&self, params: &[f64], acts: &Activations, tangent: &[f64]) -> Result<Vec<Vec<f64>>, NnError> {
        check("parameter vector", self.num_params, params.len())?;
        check("tangent vector", self.num_params, tangent.len())?;
        let n = acts.batch;
        // Input tangent is zero, so the first layer only sees dW and db.
        let mut t_in: Option<Vec<f64>> = None;
        for (i, l) in self.trunk.iter().enumerate() {
            let mut dz = affine(l, tangent, &acts.trunk[i], n);
            if let Some(t) = &t_in {
                gemm(n, l.input, l.output, t, false, l.weights(params), false, 1.0, &mut dz);
            }
            for (d, y) in dz.iter_mut().zip(&acts.trunk[i + 1]) {
                *d *= 1.0 - y * y;
            }
            t_in = Some(dz);
        }
        let feat = acts.features();
        Ok(self
            .heads
            .iter()
            .map(|l| {
                let mut dz = affine(l, tangent, feat, n);
                if let Some(t) = &t_in {
                    gemm(n, l.input, l.output, t, false, l.weights(params), false, 1.0, &mut dz);
                }
                dz
            })
            .collect())
    }
}

/// `input * W + b` for one layer.
fn affine(l: &LayerShape, params: &[f64], input: &[f64], n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n * l.output);
    let bias = l.bias(params);
    for _ in 0..n {
        out.extend_from_slice(bias);
    }
    gemm(n, l.input, l.output, input, false, l.weights(params), false, 1.0, &mut out);
    out
}

/// Writes `dW = input^T * dz`, `db = colsum(dz)` into the layer's slot.
fn param_grads(l: &LayerShape, input: &[f64], dz: &[f64], n: usize, grad: &mut [f64]) {
    let (dw, db) = l.split_mut(grad);
    gemm(l.input, n, l.output, input, true, dz, false, 0.0, dw);
    db.fill(0.0);
    for row in dz.chunks_exact(l.output.max(1)) {
        for (b, d) in db.iter_mut().zip(row) {
            *b += d;
        }
    }
}
