//! Dense networks with analytic gradients and the Gaussian policy head.

pub mod gaussian;
pub mod linalg;
mod mlp;

pub use gaussian::{kl, log_prob, DiagGaussian};
pub use mlp::{Activations, LayerParams, LayerShape, Mlp, MlpSpec, NnError};
