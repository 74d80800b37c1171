//! Binary checkpoint container.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! b"HDPG"                      magic
//! u32                          format version
//! u32 + bytes                  manifest: UTF-8 `key=value` lines, keys sorted
//! 4 x network block            actor, critic, target actor, target critic
//!
//! network block:
//!   u32                        layer count L
//!   L x (u32 rows, u32 cols)
//!   L x (rows*cols f64 weights row-major, rows f64 bias)
//! ```

use std::collections::BTreeMap;

use thiserror::Error;

use super::DenseLayer;

pub const MAGIC: &[u8; 4] = b"HDPG";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum CheckpointError {
    #[error("not a checkpoint: bad magic bytes")]
    BadMagic,
    #[error("unsupported checkpoint version {0}")]
    UnsupportedVersion(u32),
    #[error("checkpoint truncated while reading {0}")]
    Truncated(&'static str),
    #[error("malformed manifest: {0}")]
    Manifest(String),
    #[error("non-finite value in network {network}, layer {layer}")]
    NonFinite { network: usize, layer: usize },
    #[error("{0} trailing bytes after last network")]
    TrailingBytes(usize),
}

/// Names of the four serialized networks, in file order.
pub const NETWORK_ORDER: [&str; 4] = ["actor", "critic", "target_actor", "target_critic"];

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub manifest: BTreeMap<String, String>,
    pub actor: Vec<DenseLayer>,
    pub critic: Vec<DenseLayer>,
    pub target_actor: Vec<DenseLayer>,
    pub target_critic: Vec<DenseLayer>,
}

impl Checkpoint {
    fn networks(&self) -> [&Vec<DenseLayer>; 4] {
        [
            &self.actor,
            &self.critic,
            &self.target_actor,
            &self.target_critic,
        ]
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        let manifest: String = self
            .manifest
            .iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect();
        out.extend_from_slice(&(manifest.len() as u32).to_le_bytes());
        out.extend_from_slice(manifest.as_bytes());
        for net in self.networks() {
            out.extend_from_slice(&(net.len() as u32).to_le_bytes());
            for layer in net {
                out.extend_from_slice(&(layer.rows as u32).to_le_bytes());
                out.extend_from_slice(&(layer.cols as u32).to_le_bytes());
            }
            for layer in net {
                for v in layer.weights.iter().chain(&layer.bias) {
                    out.extend_from_slice(&v.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, CheckpointError> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4, "magic")? != MAGIC {
            return Err(CheckpointError::BadMagic);
        }
        let version = r.u32("version")?;
        if version != FORMAT_VERSION {
            return Err(CheckpointError::UnsupportedVersion(version));
        }
        let len = r.u32("manifest length")? as usize;
        let text = std::str::from_utf8(r.take(len, "manifest")?)
            .map_err(|e| CheckpointError::Manifest(e.to_string()))?;
        let mut manifest = BTreeMap::new();
        for line in text.lines().filter(|l| !l.is_empty()) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| CheckpointError::Manifest(format!("line without '=': {line}")))?;
            manifest.insert(k.to_string(), v.to_string());
        }

        let mut nets = Vec::with_capacity(4);
        for network in 0..4 {
            let count = r.u32("layer count")? as usize;
            let mut shapes = Vec::with_capacity(count);
            for _ in 0..count {
                shapes.push((r.u32("rows")? as usize, r.u32("cols")? as usize));
            }
            let mut layers = Vec::with_capacity(count);
            for (layer, (rows, cols)) in shapes.into_iter().enumerate() {
                let weights = r.f64s(rows * cols, "weights")?;
                let bias = r.f64s(rows, "bias")?;
                if weights.iter().chain(&bias).any(|v| !v.is_finite()) {
                    return Err(CheckpointError::NonFinite { network, layer });
                }
                layers.push(DenseLayer {
                    rows,
                    cols,
                    weights,
                    bias,
                });
            }
            nets.push(layers);
        }
        if r.pos != bytes.len() {
            return Err(CheckpointError::TrailingBytes(bytes.len() - r.pos));
        }
        let mut nets = nets.into_iter();
        Ok(Self {
            manifest,
            actor: nets.next().unwrap(),
            critic: nets.next().unwrap(),
            target_actor: nets.next().unwrap(),
            target_critic: nets.next().unwrap(),
        })
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &'static str) -> Result<&'a [u8], CheckpointError> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or(CheckpointError::Truncated(what))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self, what: &'static str) -> Result<u32, CheckpointError> {
        let b = self.take(4, what)?;
        Ok(u32::from_le_bytes(b.try_into().unwrap()))
    }

    fn f64s(&mut self, n: usize, what: &'static str) -> Result<Vec<f64>, CheckpointError> {
        let b = self.take(n.checked_mul(8).ok_or(CheckpointError::Truncated(what))?, what)?;
        Ok(b.chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}
