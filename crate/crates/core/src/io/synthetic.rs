//! Separable synthetic activities with known sub-action structure.
//!
//! Every video walks through the `K` sub-actions in canonical order, subject
//! to random adjacent swaps and an optional dropped sub-action. Each segment
//! feature is its sub-action's mean plus isotropic Gaussian noise whose
//! per-dimension standard deviation is `noise` times the smallest distance
//! between two means.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::write_features;
use super::ground_truth::write_ground_truth;
use super::manifest::{ActivityEntry, Manifest, VideoEntry};
use crate::encoding::DEFAULT_FRAME_SPAN;
use crate::error::{Error, Result};
use crate::evaluator::VideoTruth;
use crate::numerics::matrix::norm;
use crate::numerics::rng::stream;
use crate::numerics::{Matrix, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub activity: String,
    pub classes: usize,
    pub videos: usize,
    pub feature_dim: usize,
    pub min_segments: usize,
    pub max_segments: usize,
    /// Noise scale relative to the minimum mean separation.
    pub noise: f64,
    pub permutation_rate: f64,
    pub dropout_rate: f64,
    /// Norm of every class mean.
    pub mean_scale: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            activity: "synth".into(),
            classes: 5,
            videos: 50,
            feature_dim: 32,
            min_segments: 40,
            max_segments: 80,
            noise: 0.1,
            permutation_rate: 0.0,
            dropout_rate: 0.0,
            mean_scale: 5.0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.classes < 2 {
            return fail(format!("synthetic data needs at least two classes, got {}", self.classes));
        }
        if self.videos == 0 || self.feature_dim == 0 {
            return fail("synthetic data needs videos and a positive feature dimension".into());
        }
        if self.min_segments < self.classes || self.max_segments < self.min_segments {
            return fail(format!(
                "segment range {}..={} must start at or above the class count {}",
                self.min_segments, self.max_segments, self.classes
            ));
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return fail(format!("noise must be non-negative, got {}", self.noise));
        }
        for (name, r) in [("permutation", self.permutation_rate), ("dropout", self.dropout_rate)] {
            if !(0.0..=1.0).contains(&r) {
                return fail(format!("{name} rate must be in [0, 1], got {r}"));
            }
        }
        if !(self.mean_scale > 0.0 && self.mean_scale.is_finite()) {
            return fail(format!("mean scale must be positive, got {}", self.mean_scale));
        }
        Ok(())
    }

    pub fn class_token(k: usize) -> String {
        format!("s{k}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntheticVideo {
    pub id: String,
    pub features: Matrix,
    pub truth: VideoTruth,
    /// Sub-actions in the order they occur.
    pub order: Vec<usize>,
    /// Segment-level class index.
    pub segment_classes: Vec<usize>,
}

/// Scaled basis vectors when there is room, random directions otherwise.
pub fn class_means(spec: &SyntheticSpec, rng: &mut Rng) -> Matrix {
    let (k, d) = (spec.classes, spec.feature_dim);
    let mut means = Matrix::zeros(k, d);
    if d >= k {
        for c in 0..k {
            means.set(c, c, spec.mean_scale);
        }
        return means;
    }
    for c in 0..k {
        loop {
            let v: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let n = norm(&v);
            if n > 1e-9 {
                for (o, x) in means.row_mut(c).iter_mut().zip(&v) {
                    *o = spec.mean_scale * x / n;
                }
                break;
            }
        }
    }
    means
}

pub fn min_separation(means: &Matrix) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..means.rows() {
        for j in i + 1..means.rows() {
            let d: f64 = means
                .row(i)
                .iter()
                .zip(means.row(j))
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            best = best.min(d);
        }
    }
    best
}

/// Splits `total` into one positive share per weight, proportional to the weights.
fn allocate(total: usize, weights: &[f64]) -> Vec<usize> {
    let spare = total - weights.len();
    let sum: f64 = weights.iter().sum();
    let exact: Vec<f64> = weights.iter().map(|w| spare as f64 * w / sum).collect();
    let mut shares: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut left = spare - shares.iter().sum::<usize>();
    let mut by_remainder: Vec<usize> = (0..weights.len()).collect();
    by_remainder.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &i in &by_remainder {
        if left == 0 {
            break;
        }
        shares[i] += 1;
        left -= 1;
    }
    shares.iter().map(|s| s + 1).collect()
}

pub fn synthesize(spec: &SyntheticSpec, seed: u64) -> Result<Vec<SyntheticVideo>> {
    spec.validate()?;
    let mut rng = Rng::new(seed, stream::SYNTH);
    let means = class_means(spec, &mut rng);
    let sigma = spec.noise * min_separation(&means);
    let mut out = Vec::with_capacity(spec.videos);
    for n in 0..spec.videos {
        let mut order: Vec<usize> = (0..spec.classes).collect();
        for i in 0..order.len() - 1 {
            if rng.bernoulli(spec.permutation_rate) {
                order.swap(i, i + 1);
            }
        }
        if rng.bernoulli(spec.dropout_rate) {
            order.remove(rng.below(order.len()));
        }
        let segments = rng.range_inclusive(spec.min_segments, spec.max_segments);
        let weights: Vec<f64> = order.iter().map(|_| rng.uniform(0.5, 1.5)).collect();
        let shares = allocate(segments, &weights);
        let segment_classes: Vec<usize> = order
            .iter()
            .zip(&shares)
            .flat_map(|(&c, &s)| std::iter::repeat_n(c, s))
            .collect();
        let mut features = Matrix::zeros(segments, spec.feature_dim);
        for (m, &c) in segment_classes.iter().enumerate() {
            for (j, v) in features.row_mut(m).iter_mut().enumerate() {
                *v = means.get(c, j) + if sigma > 0.0 { sigma * rng.normal() } else { 0.0 };
            }
        }
        let frames = segment_classes
            .iter()
            .flat_map(|&c| std::iter::repeat_n(SyntheticSpec::class_token(c), DEFAULT_FRAME_SPAN))
            .collect();
        let id = format!("{}_{n:03}", spec.activity);
        out.push(SyntheticVideo {
            truth: VideoTruth {
                video_id: id.clone(),
                frames,
            },
            id,
            features,
            order,
            segment_classes,
        });
    }
    Ok(out)
}

/// Writes features, ground truth and `manifest.json` under `dir`.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64, dir: &Path) -> Result<Manifest> {
    let videos = synthesize(spec, seed)?;
    let mut entries = Vec::with_capacity(videos.len());
    for v in &videos {
        let feature_path = Path::new("features").join(format!("{}.vfea", v.id));
        let gt_path = Path::new("gt").join(format!("{}.txt", v.id));
        write_features(&dir.join(&feature_path), &v.features)?;
        write_ground_truth(&dir.join(&gt_path), &v.truth)?;
        entries.push(VideoEntry {
            id: v.id.clone(),
            feature_path,
            gt_path: Some(gt_path),
            frame_count: v.truth.frames.len(),
        });
    }
    let manifest = Manifest {
        activities: vec![ActivityEntry {
            name: spec.activity.clone(),
            k: spec.classes,
            videos: entries,
        }],
    };
    manifest.save(&dir.join("manifest.json"))?;
    Ok(manifest)
}
