//! Stages wired together over a manifest: ingest, train, segment, write, score.
//!
//! Output layout under the chosen directory:
//!
//! ```text
//! <out>/report.json
//! <out>/<activity>/checkpoint.bin
//! <out>/<activity>/loss.tsv
//! <out>/<activity>/strips.svg
//! <out>/<activity>/labels/<video>.txt
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::{encode_sequence, FeatureSequence, PosEncodingConfig, DEFAULT_FRAME_SPAN};
use crate::error::{Error, Result};
use crate::evaluator::{evaluate, vocabulary, ActivityEval, EvalReport, MatchingMode, VideoTruth};
use crate::io::checkpoint::save_checkpoint;
use crate::io::features::load_features;
use crate::io::ground_truth::load_ground_truth;
use crate::io::labels::{load_labels, write_labels};
use crate::io::manifest::{ActivityEntry, Manifest};
use crate::io::svg::{emit_strips, Strip, StripGroup};
use crate::io::write_bytes;
use crate::segmenter::{segment_activity, BackgroundPolicy, Segmentation};
use crate::trainer::{format_loss_log, train, TrainConfig, TrainedModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    /// `concepts` is replaced by each activity's `k`.
    pub train: TrainConfig,
    pub background_ratio: f64,
    pub matching: MatchingMode,
    /// Ground-truth token excluded from scoring.
    pub background_label: Option<String>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            train: TrainConfig::default(),
            background_ratio: 0.0,
            matching: MatchingMode::Activity,
            background_label: None,
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        BackgroundPolicy::new(self.background_ratio).map(|_| ())
    }

    pub fn for_activity(&self, act: &ActivityEntry) -> TrainConfig {
        TrainConfig {
            concepts: act.k,
            ..self.train.clone()
        }
    }
}

/// Features of every video in an activity, with positional encodings.
pub fn load_activity(act: &ActivityEntry, encoding: &PosEncodingConfig) -> Result<Vec<FeatureSequence>> {
    act.videos
        .iter()
        .map(|v| encode_sequence(v.id.clone(), load_features(&v.feature_path)?, encoding))
        .collect()
}

/// Ground truth for every video, or `None` if any video lacks it.
pub fn load_truths(act: &ActivityEntry, seqs: &[FeatureSequence]) -> Result<Option<Vec<VideoTruth>>> {
    let mut out = Vec::new();
    for (v, seq) in act.videos.iter().zip(seqs) {
        let Some(path) = &v.gt_path else {
            return Ok(None);
        };
        let truth = load_ground_truth(path, &v.id)?;
        let segments = truth.frames.len().div_ceil(seq.frame_span);
        if segments != seq.len() {
            return Err(Error::Ingestion(format!(
                "video {}: {} ground-truth frames give {segments} segments, features have {}",
                v.id,
                truth.frames.len(),
                seq.len()
            )));
        }
        out.push(truth);
    }
    Ok(Some(out))
}

pub struct ActivityRun {
    pub name: String,
    pub model: TrainedModel,
    pub segmentation: Segmentation,
    pub truth: Option<Vec<VideoTruth>>,
}

impl ActivityRun {
    pub fn eval_input(&self, decoded: bool) -> Option<ActivityEval> {
        let truth = self.truth.clone()?;
        let predictions = self
            .segmentation
            .videos
            .iter()
            .map(|l| {
                let labels = if decoded { &l.decoded_labels } else { &l.initial_labels };
                (l.video_id.clone(), labels.clone())
            })
            .collect();
        Some(ActivityEval {
            name: self.name.clone(),
            clusters: self.model.bank.count(),
            frame_span: DEFAULT_FRAME_SPAN,
            truth,
            predictions,
        })
    }
}

pub fn run_activity(act: &ActivityEntry, cfg: &PipelineConfig) -> Result<ActivityRun> {
    let train_cfg = cfg.for_activity(act);
    let seqs = load_activity(act, &train_cfg.encoding)?;
    let truth = load_truths(act, &seqs)?;
    let model = train(&seqs, &train_cfg)?;
    let policy = BackgroundPolicy::new(cfg.background_ratio)?;
    let segmentation = segment_activity(&model, &seqs, &policy)?;
    Ok(ActivityRun {
        name: act.name.clone(),
        model,
        segmentation,
        truth,
    })
}

/// Ground truth (when known), initial and decoded strips per video.
pub fn strip_groups(seg: &Segmentation, truth: Option<&[VideoTruth]>) -> Vec<StripGroup> {
    let vocab = truth.map(|t| vocabulary(t, None)).unwrap_or_default();
    seg.videos
        .iter()
        .enumerate()
        .map(|(i, lab)| {
            let mut strips = Vec::new();
            if let Some(t) = truth.and_then(|t| t.get(i)) {
                let labels = t
                    .segment_labels(DEFAULT_FRAME_SPAN)
                    .iter()
                    .map(|tok| vocab.iter().position(|v| v == tok))
                    .collect();
                strips.push(Strip {
                    name: "ground truth".into(),
                    labels,
                });
            }
            strips.push(Strip {
                name: "initial".into(),
                labels: lab.initial_labels.clone(),
            });
            strips.push(Strip {
                name: "decoded".into(),
                labels: lab.decoded_labels.clone(),
            });
            StripGroup {
                title: lab.video_id.clone(),
                strips,
            }
        })
        .collect()
}

pub fn write_activity(dir: &Path, run: &ActivityRun) -> Result<()> {
    save_checkpoint(&dir.join("checkpoint.bin"), &run.model)?;
    write_bytes(&dir.join("loss.tsv"), format_loss_log(&run.model.losses).as_bytes())?;
    write_labelings(&dir.join("labels"), &run.segmentation)?;
    let svg = emit_strips(&strip_groups(&run.segmentation, run.truth.as_deref()));
    write_bytes(&dir.join("strips.svg"), svg.as_bytes())
}

pub fn write_labelings(dir: &Path, seg: &Segmentation) -> Result<()> {
    for lab in &seg.videos {
        write_labels(&dir.join(format!("{}.txt", lab.video_id)), lab)?;
    }
    Ok(())
}

/// Runs every activity (in parallel), writes outputs, and scores the
/// decoded labels when all ground truth is present.
pub fn run_pipeline(manifest: &Manifest, cfg: &PipelineConfig, out: &Path) -> Result<Option<EvalReport>> {
    cfg.validate()?;
    let runs = manifest
        .activities
        .par_iter()
        .map(|act| {
            let run = run_activity(act, cfg)?;
            write_activity(&out.join(&act.name), &run)?;
            Ok(run)
        })
        .collect::<Result<Vec<_>>>()?;
    let Some(evals) = runs.iter().map(|r| r.eval_input(true)).collect::<Option<Vec<_>>>() else {
        return Ok(None);
    };
    let report = evaluate(&evals, cfg.matching, cfg.background_label.as_deref())?;
    write_bytes(&out.join("report.json"), report.to_json().as_bytes())?;
    Ok(Some(report))
}

/// Per-video segment labels keyed by video id.
pub type Predictions = BTreeMap<String, Vec<Option<usize>>>;

/// Where a video's label file may live under a predictions directory.
pub fn label_candidates(dir: &Path, activity: &str, video: &str) -> [PathBuf; 3] {
    let file = format!("{video}.txt");
    [
        dir.join(activity).join("labels").join(&file),
        dir.join("labels").join(&file),
        dir.join(&file),
    ]
}

/// Reads label files for every video; absent ones are collected for an
/// inventory error.
pub fn collect_predictions(
    manifest: &Manifest,
    dir: &Path,
    decoded: bool,
) -> Result<BTreeMap<String, Predictions>> {
    let mut out = BTreeMap::new();
    let mut missing = Vec::new();
    for act in &manifest.activities {
        let mut preds = BTreeMap::new();
        for v in &act.videos {
            match label_candidates(dir, &act.name, &v.id).iter().find(|p| p.is_file()) {
                Some(path) => {
                    let file = load_labels(path)?;
                    preds.insert(v.id.clone(), if decoded { file.decoded } else { file.initial });
                }
                None => missing.push(v.id.clone()),
            }
        }
        out.insert(act.name.clone(), preds);
    }
    if !missing.is_empty() {
        return Err(Error::Inventory(missing));
    }
    Ok(out)
}

/// Scores label files against the manifest's ground truth.
pub fn evaluate_predictions(
    manifest: &Manifest,
    dir: &Path,
    mode: MatchingMode,
    background: Option<&str>,
    decoded: bool,
) -> Result<EvalReport> {
    let mut predictions = collect_predictions(manifest, dir, decoded)?;
    let mut evals = Vec::new();
    for act in &manifest.activities {
        let mut truth = Vec::new();
        for v in &act.videos {
            let path = v
                .gt_path
                .as_ref()
                .ok_or_else(|| Error::Ingestion(format!("video {} has no ground truth", v.id)))?;
            truth.push(load_ground_truth(path, &v.id)?);
        }
        evals.push(ActivityEval {
            name: act.name.clone(),
            clusters: act.k,
            frame_span: DEFAULT_FRAME_SPAN,
            truth,
            predictions: predictions.remove(&act.name).unwrap_or_default(),
        });
    }
    evaluate(&evals, mode, background)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub k: usize,
    /// Decoded MoF per seed.
    pub mof: Vec<f64>,
    pub mean: f64,
}

/// Trains and scores one activity for each `k` and seed.
pub fn k_sweep(act: &ActivityEntry, cfg: &PipelineConfig, ks: &[usize], seeds: &[u64]) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let jobs: Vec<(usize, u64)> = ks.iter().flat_map(|&k| seeds.iter().map(move |&s| (k, s))).collect();
    let scores = jobs
        .par_iter()
        .map(|&(k, seed)| {
            let entry = ActivityEntry { k, ..act.clone() };
            let mut job = cfg.clone();
            job.train.seed = seed;
            let run = run_activity(&entry, &job)?;
            let eval = run
                .eval_input(true)
                .ok_or_else(|| Error::Ingestion(format!("activity {} lacks ground truth", act.name)))?;
            Ok(evaluate(&[eval], cfg.matching, cfg.background_label.as_deref())?.mof)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ks
        .iter()
        .zip(scores.chunks(seeds.len().max(1)))
        .map(|(&k, mof)| SweepRow {
            k,
            mof: mof.to_vec(),
            mean: mof.iter().sum::<f64>() / mof.len().max(1) as f64,
        })
        .collect())
}

/// `k<TAB>seed…<TAB>mean` table with a header line.
pub fn format_sweep(rows: &[SweepRow], seeds: &[u64]) -> String {
    let mut out = String::from("k");
    for s in seeds {
        out.push_str(&format!("\tseed{s}"));
    }
    out.push_str("\tmean\n");
    for r in rows {
        out.push_str(&r.k.to_string());
        for m in &r.mof {
            out.push_str(&format!("\t{m:.4}"));
        }
        out.push_str(&format!("\t{:.4}\n", r.mean));
    }
    out
}

/// The `k` values of a sweep: `center ± radius`, never below 2.
pub fn sweep_range(center: usize, radius: usize) -> Vec<usize> {
    (center.saturating_sub(radius).max(2)..=center + radius).collect()
}
