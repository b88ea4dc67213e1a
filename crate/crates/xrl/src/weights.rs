//! Binary Q-network weight files.
//!
//! Layout: the 8-byte magic `XRLMLPW\0`, a `u32` format version, the four
//! layer widths `[d, h1, h2, A]` as `u32`, then every parameter as a
//! little-endian `f64` in the order W1 b1 W2 b2 W3 b3, matrices row-major
//! (one row per output unit). All integers are little-endian.

use std::fs;
use std::path::Path;

use xrl_core::policy::{Layer, MlpPolicy};

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"XRLMLPW\0";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 * 4;

pub fn encode(policy: &MlpPolicy) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * policy.parameter_count());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for dim in policy.dims() {
        out.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    for layer in policy.layers() {
        for v in layer.weights.iter().chain(&layer.bias) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

/// Parses a weight file image; `path` only labels errors.
pub fn decode(bytes: &[u8], path: &Path) -> Result<MlpPolicy> {
    if bytes.len() < 8 || &bytes[..8] != MAGIC {
        return Err(Error::format(path, "bad magic, not a weight file"));
    }
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(
            path,
            format!("truncated header: missing {} bytes", HEADER_LEN - bytes.len()),
        ));
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap());
    let version = word(8);
    if version != FORMAT_VERSION {
        return Err(Error::format(path, format!("unsupported version {version}")));
    }
    let dims: Vec<usize> = (0..4).map(|i| word(12 + 4 * i) as usize).collect();
    if dims.contains(&0) {
        return Err(Error::format(path, format!("invalid layer widths {dims:?}")));
    }
    let params: usize = dims.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
    let expected = HEADER_LEN + 8 * params;
    if bytes.len() < expected {
        return Err(Error::format(
            path,
            format!("truncated file: missing {} bytes", expected - bytes.len()),
        ));
    }
    if bytes.len() > expected {
        return Err(Error::format(
            path,
            format!("{} trailing bytes after parameters", bytes.len() - expected),
        ));
    }
    let mut values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut layer = |inputs: usize, outputs: usize| {
        let mut l = Layer::zeros(inputs, outputs);
        for w in l.weights.iter_mut().chain(l.bias.iter_mut()) {
            *w = values.next().unwrap();
        }
        l
    };
    let layers = [layer(dims[0], dims[1]), layer(dims[1], dims[2]), layer(dims[2], dims[3])];
    MlpPolicy::from_layers(layers).map_err(|e| Error::format(path, e.to_string()))
}

pub fn save_weights(policy: &MlpPolicy, path: &Path) -> Result<()> {
    fs::write(path, encode(policy)).map_err(|e| Error::io(path, e))
}

pub fn load_weights(path: &Path) -> Result<MlpPolicy> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode(&bytes, path)
}
