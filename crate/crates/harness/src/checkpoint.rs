//! Binary checkpoint of policy and value parameters.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic           8 bytes  "UAVBSCKP"
//! version         u32      = 1
//! obs_dim         u32
//! action_dim      u32
//! policy layers   u32 count, then (input u32, output u32) per layer
//! value layers    u32 count, then (input u32, output u32) per layer
//! iteration       u64
//! seed            u64
//! policy params   u64 count, then f64 values
//! value params    u64 count, then f64 values
//! ```
//!
//! Layers are listed in flat-vector order (trunk first, then heads).

use std::io::{Read, Write};
use std::path::Path;

use uavbs_core::nn::Mlp;

use crate::HarnessError;

pub const MAGIC: &[u8; 8] = b"UAVBSCKP";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub obs_dim: u32,
    pub action_dim: u32,
    pub policy_layers: Vec<(u32, u32)>,
    pub value_layers: Vec<(u32, u32)>,
    pub iteration: u64,
    pub seed: u64,
    pub policy: Vec<f64>,
    pub value: Vec<f64>,
}

pub fn layer_table(net: &Mlp) -> Vec<(u32, u32)> {
    net.layers().map(|l| (l.input as u32, l.output as u32)).collect()
}

fn bad(msg: impl Into<String>) -> HarnessError {
    HarnessError::Checkpoint(msg.into())
}

impl Checkpoint {
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 8 * (self.policy.len() + self.value.len()));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&self.obs_dim.to_le_bytes());
        out.extend_from_slice(&self.action_dim.to_le_bytes());
        for table in [&self.policy_layers, &self.value_layers] {
            out.extend_from_slice(&(table.len() as u32).to_le_bytes());
            for (i, o) in table {
                out.extend_from_slice(&i.to_le_bytes());
                out.extend_from_slice(&o.to_le_bytes());
            }
        }
        out.extend_from_slice(&self.iteration.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        for params in [&self.policy, &self.value] {
            out.extend_from_slice(&(params.len() as u64).to_le_bytes());
            for v in params {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, HarnessError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(8)? != MAGIC {
            return Err(bad("not a checkpoint file (bad magic)"));
        }
        let version = r.u32()?;
        if version != FORMAT_VERSION {
            return Err(bad(format!("unsupported checkpoint version {version}")));
        }
        let obs_dim = r.u32()?;
        let action_dim = r.u32()?;
        let mut tables = [Vec::new(), Vec::new()];
        for table in &mut tables {
            let n = r.u32()?;
            for _ in 0..n {
                table.push((r.u32()?, r.u32()?));
            }
        }
        let iteration = r.u64()?;
        let seed = r.u64()?;
        let policy = r.f64s()?;
        let value = r.f64s()?;
        if r.pos != bytes.len() {
            return Err(bad("trailing bytes after checkpoint"));
        }
        let [policy_layers, value_layers] = tables;
        Ok(Self { obs_dim, action_dim, policy_layers, value_layers, iteration, seed, policy, value })
    }

    pub fn save(&self, path: &Path) -> Result<(), HarnessError> {
        let mut f = std::fs::File::create(path)?;
        f.write_all(&self.encode())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        Self::decode(&bytes)
    }

    /// Rejects checkpoints whose dimensions or layer tables differ from the
    /// given networks.
    pub fn check_compatible(&self, policy: &Mlp, value: &Mlp, action_dim: usize) -> Result<(), HarnessError> {
        if self.obs_dim as usize != policy.input_dim() {
            return Err(bad(format!("observation width {} != expected {}", self.obs_dim, policy.input_dim())));
        }
        if self.action_dim as usize != action_dim {
            return Err(bad(format!("action width {} != expected {action_dim}", self.action_dim)));
        }
        if self.policy_layers != layer_table(policy) || self.value_layers != layer_table(value) {
            return Err(bad("layer table does not match the configured networks"));
        }
        if self.policy.len() != policy.num_params() || self.value.len() != value.num_params() {
            return Err(bad("parameter count does not match the layer table"));
        }
        Ok(())
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], HarnessError> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len()).ok_or_else(|| bad("truncated checkpoint"))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32, HarnessError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, HarnessError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64s(&mut self) -> Result<Vec<f64>, HarnessError> {
        let n = usize::try_from(self.u64()?).map_err(|_| bad("parameter count overflow"))?;
        let raw = self.take(n.checked_mul(8).ok_or_else(|| bad("parameter count overflow"))?)?;
        Ok(raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect())
    }
}
