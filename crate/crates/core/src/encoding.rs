//! Sinusoidal positional encodings over quantized temporal groups.
//!
//! A video of `M` segments is split into `g` equal groups; segment `m` gets
//! group `floor(m·g/M)` and its encoding depends on that group alone, so
//! videos of very different lengths share encodings at equal relative
//! positions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const DEFAULT_GROUPS: usize = 128;
pub const DEFAULT_PE_DIM: usize = 64;
pub const DEFAULT_FRAME_SPAN: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct PosEncodingConfig {
    pub groups: usize,
    pub dim: usize,
}

impl Default for PosEncodingConfig {
    fn default() -> Self {
        PosEncodingConfig {
            groups: DEFAULT_GROUPS,
            dim: DEFAULT_PE_DIM,
        }
    }
}

impl PosEncodingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.groups == 0 {
            return Err(Error::Config("positional encoding needs at least one group".into()));
        }
        if self.dim < 2 || !self.dim.is_multiple_of(2) {
            return Err(Error::Config(format!(
                "positional encoding dimension must be even and >= 2, got {}",
                self.dim
            )));
        }
        Ok(())
    }
}

/// One video: per-segment features and their positional encodings.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSequence {
    pub video_id: String,
    pub features: Matrix,
    pub pos_encodings: Matrix,
    pub frame_span: usize,
}

impl FeatureSequence {
    pub fn len(&self) -> usize {
        self.features.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.rows() == 0
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn pe_dim(&self) -> usize {
        self.pos_encodings.cols()
    }
}

/// Temporal group of segment `m` out of `segments`.
pub fn group_index(m: usize, segments: usize, groups: usize) -> Result<usize> {
    if m >= segments {
        return Err(Error::Index {
            index: m,
            len: segments,
        });
    }
    let g = (m as u128 * groups as u128 / segments as u128) as usize;
    Ok(g.min(groups.saturating_sub(1)))
}

/// Interleaved sinusoid: entry `2i` is `sin(pos/10000^(2i/d))`, entry `2i+1` the cosine.
pub fn positional_encoding(pos: usize, dim: usize) -> Result<Vec<f64>> {
    if !dim.is_multiple_of(2) {
        return Err(Error::Config(format!(
            "positional encoding dimension must be even, got {dim}"
        )));
    }
    let mut out = Vec::with_capacity(dim);
    for i in 0..dim / 2 {
        let angle = pos as f64 / 10000f64.powf(2.0 * i as f64 / dim as f64);
        out.push(angle.sin());
        out.push(angle.cos());
    }
    Ok(out)
}

pub fn encode_sequence(
    video_id: impl Into<String>,
    features: Matrix,
    cfg: &PosEncodingConfig,
) -> Result<FeatureSequence> {
    let video_id = video_id.into();
    cfg.validate()?;
    let m_total = features.rows();
    if m_total == 0 || features.cols() == 0 {
        return Err(Error::Ingestion(format!(
            "video {video_id} has an empty feature matrix"
        )));
    }
    if !features.is_finite() {
        return Err(Error::Ingestion(format!(
            "video {video_id} has non-finite feature values"
        )));
    }
    let mut pos_encodings = Matrix::zeros(m_total, cfg.dim);
    let mut last_group = usize::MAX;
    let mut row = Vec::new();
    for m in 0..m_total {
        let g = group_index(m, m_total, cfg.groups)?;
        if g != last_group {
            row = positional_encoding(g, cfg.dim)?;
            last_group = g;
        }
        pos_encodings.row_mut(m).copy_from_slice(&row);
    }
    Ok(FeatureSequence {
        video_id,
        features,
        pos_encodings,
        frame_span: DEFAULT_FRAME_SPAN,
    })
}
