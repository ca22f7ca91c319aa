//! Binary checkpoints: `"PADA"`, version `u32`, layer count `u32`, then per
//! layer `in`, `out` (`u32` each) followed by the row-major weight block and
//! the bias block as little-endian `f64`. A JSON sidecar next to the file
//! records the shapes and the input normalization.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{PadaError, Result};
use crate::nn::mlp::{Layer, Mlp, Normalizer};

pub const MAGIC: &[u8; 4] = b"PADA";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub version: u32,
    pub widths: Vec<usize>,
    pub input_norm: Normalizer,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn encode(net: &Mlp) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * net.n_params());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(net.layers().len() as u32).to_le_bytes());
    for l in net.layers() {
        out.extend_from_slice(&(l.in_dim as u32).to_le_bytes());
        out.extend_from_slice(&(l.out_dim as u32).to_le_bytes());
        for v in l.weights.iter().chain(&l.bias) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos + n;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| PadaError::Checkpoint("truncated checkpoint".into()))?;
        self.pos = end;
        Ok(chunk)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        Ok(self
            .take(8 * n)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }
}

/// Decodes the binary block; the normalization comes from the sidecar.
pub fn decode(bytes: &[u8], input_norm: Normalizer) -> Result<Mlp> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(PadaError::Checkpoint("bad magic bytes".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(PadaError::Checkpoint(format!("unsupported version {version}")));
    }
    let n_layers = r.u32()? as usize;
    let mut layers = Vec::with_capacity(n_layers);
    for _ in 0..n_layers {
        let in_dim = r.u32()? as usize;
        let out_dim = r.u32()? as usize;
        let weights = r.f64s(in_dim * out_dim)?;
        let bias = r.f64s(out_dim)?;
        layers.push(Layer {
            in_dim,
            out_dim,
            weights,
            bias,
        });
    }
    if r.pos != bytes.len() {
        return Err(PadaError::Checkpoint("trailing bytes".into()));
    }
    Mlp::from_layers(layers, input_norm)
}

pub fn save(net: &Mlp, path: &Path) -> Result<()> {
    fs::write(path, encode(net))?;
    let meta = CheckpointMeta {
        version: VERSION,
        widths: net.widths(),
        input_norm: net.input_norm().clone(),
    };
    let json = serde_json::to_string_pretty(&meta).map_err(|e| PadaError::Checkpoint(e.to_string()))?;
    fs::write(sidecar_path(path), json)?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Mlp> {
    let meta: CheckpointMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)
        .map_err(|e| PadaError::Checkpoint(e.to_string()))?;
    let net = decode(&fs::read(path)?, meta.input_norm)?;
    if net.widths() != meta.widths {
        return Err(PadaError::Checkpoint("sidecar shapes disagree with weights".into()));
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::common::RngStream;

    #[test]
    fn round_trip_is_exact() {
        let mut rng = RngStream::new(3, "ckpt");
        let net = Mlp::new(&[4, 7, 5, 2], &mut rng).with_input_norm(Normalizer {
            mean: vec![0.1, 0.2, 0.3, 0.4],
            std: vec![1.0, 2.0, 3.0, 4.0],
        });
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("net.bin");
        save(&net, &p).unwrap();
        assert_eq!(load(&p).unwrap(), net);
        let bytes = fs::read(&p).unwrap();
        assert_eq!(&bytes[..4], b"PADA");
        assert_eq!(bytes.len(), 12 + 3 * 8 + 8 * net.n_params());
    }

    #[test]
    fn corrupt_input_rejected() {
        let net = Mlp::zeros(&[2, 3, 1]);
        let mut bytes = encode(&net);
        bytes[0] = b'X';
        assert!(decode(&bytes, Normalizer::identity(2)).is_err());
        let bytes = encode(&net);
        assert!(decode(&bytes[..bytes.len() - 1], Normalizer::identity(2)).is_err());
    }
}
