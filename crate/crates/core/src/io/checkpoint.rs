//! Binary model checkpoints.
//!
//! Layout, all little-endian:
//!
//! | field | encoding |
//! |-------|----------|
//! | magic | `SSCK` |
//! | version | `u32` = 1 |
//! | config hash | 32 bytes, SHA-256 of the config JSON |
//! | config | `u32` length + JSON bytes |
//! | tensors | `u32` count, then per tensor `u32` rows, `u32` cols, `f64` values row-major |
//!
//! Tensors are the six encoder/decoder layers (weight then bias), the fixed
//! concept vectors, the concept transform weight and bias, and finally the
//! per-epoch loss trace as an `epochs × 4` matrix.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::{read_bytes, write_bytes};
use crate::dlcl::ConceptBank;
use crate::embedding::EmbeddingNet;
use crate::error::{Error, Result};
use crate::numerics::{LinearLayer, Matrix};
use crate::trainer::{EpochLoss, TrainConfig, TrainedModel};

pub const MAGIC: &[u8; 4] = b"SSCK";
pub const VERSION: u32 = 1;

pub fn config_hash(cfg: &TrainConfig) -> [u8; 32] {
    let json = serde_json::to_vec(cfg).expect("config serializes");
    Sha256::digest(&json).into()
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

fn push_u32(out: &mut Vec<u8>, v: usize) {
    out.extend_from_slice(&(v as u32).to_le_bytes());
}

fn push_tensor(out: &mut Vec<u8>, rows: usize, cols: usize, data: &[f64]) {
    push_u32(out, rows);
    push_u32(out, cols);
    for v in data {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

fn layers(model: &TrainedModel) -> impl Iterator<Item = &LinearLayer> {
    model.net.encoder.iter().chain(model.net.decoder.iter())
}

pub fn encode_checkpoint(model: &TrainedModel) -> Vec<u8> {
    let json = serde_json::to_vec(&model.config).expect("config serializes");
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    push_u32(&mut out, VERSION as usize);
    out.extend_from_slice(&config_hash(&model.config));
    push_u32(&mut out, json.len());
    out.extend_from_slice(&json);
    push_u32(&mut out, 6 * 2 + 4);
    for layer in layers(model) {
        let (r, c) = layer.weight.shape();
        push_tensor(&mut out, r, c, layer.weight.data());
        push_tensor(&mut out, 1, layer.bias.len(), &layer.bias);
    }
    let bank = &model.bank;
    push_tensor(&mut out, bank.count(), bank.dim(), bank.initial.data());
    push_tensor(&mut out, bank.dim(), bank.dim(), bank.transform.weight.data());
    push_tensor(&mut out, 1, bank.dim(), &bank.transform.bias);
    let trace: Vec<f64> = model
        .losses
        .iter()
        .flat_map(|l| [l.epoch as f64, l.loss_r, l.loss_d, l.total])
        .collect();
    push_tensor(&mut out, model.losses.len(), 4, &trace);
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    at: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn err(&self, message: impl Into<String>) -> Error {
        Error::Format {
            path: self.path.to_path_buf(),
            offset: self.at as u64,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.at < n {
            return Err(self.err(format!(
                "expected {n} more bytes, found {}",
                self.bytes.len() - self.at
            )));
        }
        let s = &self.bytes[self.at..self.at + n];
        self.at += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("four bytes")) as usize)
    }

    fn tensor(&mut self) -> Result<Matrix> {
        let rows = self.u32()?;
        let cols = self.u32()?;
        let n = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(8))
            .ok_or_else(|| self.err("tensor size overflows"))?;
        let raw = self.take(n)?;
        let data = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("eight bytes")))
            .collect();
        Matrix::from_vec(rows, cols, data)
    }

    fn vector(&mut self) -> Result<Vec<f64>> {
        let t = self.tensor()?;
        if t.rows() != 1 {
            return Err(self.err(format!("expected a 1-row tensor, found {} rows", t.rows())));
        }
        Ok(t.into_vec())
    }
}

/// Decodes a checkpoint; with `expected`, its config hash must match.
pub fn decode_checkpoint(bytes: &[u8], path: &Path, expected: Option<&TrainConfig>) -> Result<TrainedModel> {
    let mut r = Reader { bytes, at: 0, path };
    if r.take(4)? != MAGIC {
        r.at = 0;
        return Err(r.err("bad magic, expected SSCK"));
    }
    let version = r.u32()?;
    if version != VERSION as usize {
        return Err(r.err(format!("unsupported checkpoint version {version}")));
    }
    let stored: [u8; 32] = r.take(32)?.try_into().expect("32 bytes");
    let len = r.u32()?;
    let json = r.take(len)?;
    let config: TrainConfig = serde_json::from_slice(json).map_err(|e| r.err(format!("bad config: {e}")))?;
    if config_hash(&config) != stored {
        return Err(r.err("stored config does not match its hash"));
    }
    if let Some(exp) = expected {
        let want = config_hash(exp);
        if want != stored {
            return Err(Error::Contract(format!(
                "{}: checkpoint config hash {} does not match expected {}",
                path.display(),
                hex(&stored),
                hex(&want)
            )));
        }
    }
    let count = r.u32()?;
    if count != 16 {
        return Err(r.err(format!("expected 16 tensors, found {count}")));
    }
    let read_layer = |r: &mut Reader| -> Result<LinearLayer> {
        let w = r.tensor()?;
        let b = r.vector()?;
        LinearLayer::from_parts(w, b)
    };
    let enc = [read_layer(&mut r)?, read_layer(&mut r)?, read_layer(&mut r)?];
    let dec = [read_layer(&mut r)?, read_layer(&mut r)?, read_layer(&mut r)?];
    let initial = r.tensor()?;
    let weight = r.tensor()?;
    let bias = r.vector()?;
    let trace = r.tensor()?;
    if r.at != bytes.len() {
        return Err(r.err(format!("{} trailing bytes", bytes.len() - r.at)));
    }
    let latent_dim = enc[2].output_dim();
    let input_dim = enc[0].input_dim();
    let pe_dim = config.encoding.dim;
    if input_dim < pe_dim || dec[2].output_dim() != input_dim || initial.cols() != latent_dim + pe_dim {
        return Err(r.err("tensor shapes are inconsistent"));
    }
    let net = EmbeddingNet {
        encoder: enc,
        decoder: dec,
        feature_dim: input_dim - pe_dim,
        pe_dim,
        latent_dim,
        skip_enabled: config.toggles.use_skip,
    };
    let bank = ConceptBank {
        initial,
        transform: LinearLayer::from_parts(weight, bias)?,
        temperature: config.temperature,
    };
    let losses = trace
        .row_iter()
        .map(|row| EpochLoss {
            epoch: row[0] as usize,
            loss_r: row[1],
            loss_d: row[2],
            total: row[3],
        })
        .collect();
    Ok(TrainedModel {
        net,
        bank,
        config,
        losses,
    })
}

pub fn save_checkpoint(path: &Path, model: &TrainedModel) -> Result<()> {
    write_bytes(path, &encode_checkpoint(model))
}

pub fn load_checkpoint(path: &Path, expected: Option<&TrainConfig>) -> Result<TrainedModel> {
    decode_checkpoint(&read_bytes(path)?, path, expected)
}
