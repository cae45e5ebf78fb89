//! Hungarian-matched segmentation metrics.
//!
//! Predicted clusters are mapped one-to-one onto ground-truth classes by
//! maximizing frame overlap, either once per activity or once per video.
//! Segment labels are expanded to frames before scoring.

pub mod hungarian;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub use hungarian::{hungarian, pad_square, Assignment};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchingMode {
    Activity,
    Video,
}

impl std::str::FromStr for MatchingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "activity" => Ok(MatchingMode::Activity),
            "video" => Ok(MatchingMode::Video),
            other => Err(Error::Config(format!(
                "matching mode must be `activity` or `video`, got `{other}`"
            ))),
        }
    }
}

/// Frame-level labels of one video.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VideoTruth {
    pub video_id: String,
    pub frames: Vec<String>,
}

impl VideoTruth {
    /// Majority label of each span of `frame_span` frames; ties go to the
    /// label occurring first in the span.
    pub fn segment_labels(&self, frame_span: usize) -> Vec<String> {
        self.frames
            .chunks(frame_span.max(1))
            .map(|span| {
                let mut best: Option<(&String, usize)> = None;
                for cand in span {
                    let count = span.iter().filter(|t| *t == cand).count();
                    if best.is_none_or(|(_, c)| count > c) {
                        best = Some((cand, count));
                    }
                }
                best.expect("chunks are non-empty").0.clone()
            })
            .collect()
    }
}

/// Sorted distinct labels, without the background token.
pub fn vocabulary<'a>(videos: impl IntoIterator<Item = &'a VideoTruth>, background: Option<&str>) -> Vec<String> {
    let set: BTreeSet<&String> = videos
        .into_iter()
        .flat_map(|v| v.frames.iter())
        .filter(|t| Some(t.as_str()) != background)
        .collect();
    set.into_iter().cloned().collect()
}

/// Each segment label copied over its frames, cut at `frames`; frames past the
/// last segment stay unlabeled.
pub fn expand_to_frames(segments: &[Option<usize>], frame_span: usize, frames: usize) -> Vec<Option<usize>> {
    let mut out: Vec<Option<usize>> = segments
        .iter()
        .flat_map(|&l| std::iter::repeat_n(l, frame_span))
        .take(frames)
        .collect();
    out.resize(frames, None);
    out
}

/// Cluster-by-class overlap counts over frames with a foreground truth label.
/// A prediction and its ground truth over the same frames.
pub type LabelPair<'a> = (&'a [Option<usize>], &'a [Option<usize>]);

pub fn overlap_counts(pairs: &[LabelPair], clusters: usize, classes: usize) -> Matrix {
    let mut m = Matrix::zeros(clusters, classes);
    for (pred, truth) in pairs {
        for (p, t) in pred.iter().zip(truth.iter()) {
            if let (Some(p), Some(t)) = (p, t) {
                if *p < clusters && *t < classes {
                    m.set(*p, *t, m.get(*p, *t) + 1.0);
                }
            }
        }
    }
    m
}

/// One-to-one cluster→class mapping maximizing total overlap.
pub fn match_overlap(overlap: &Matrix) -> Result<Vec<Option<usize>>> {
    let (clusters, classes) = overlap.shape();
    if clusters == 0 || classes == 0 {
        return Err(Error::DegenerateData("empty overlap matrix".into()));
    }
    let mut cost = overlap.clone();
    cost.scale(-1.0);
    let a = hungarian(&pad_square(&cost)?)?;
    Ok((0..clusters)
        .map(|k| {
            let c = a.columns[k];
            (c < classes).then_some(c)
        })
        .collect())
}

/// Relabels clusters with their matched class; unmatched clusters become
/// `classes + cluster` so they never count as correct.
pub fn apply_mapping(pred: &[Option<usize>], mapping: &[Option<usize>], classes: usize) -> Vec<Option<usize>> {
    pred.iter()
        .map(|p| p.map(|k| mapping.get(k).copied().flatten().unwrap_or(classes + k)))
        .collect()
}

/// Correct and evaluated frame counts; frames without a foreground truth label are skipped.
pub fn frame_counts(mapped: &[Option<usize>], truth: &[Option<usize>]) -> Result<(usize, usize)> {
    if mapped.len() != truth.len() {
        return Err(Error::Contract(format!(
            "{} predicted frames against {} ground-truth frames",
            mapped.len(),
            truth.len()
        )));
    }
    let mut correct = 0;
    let mut total = 0;
    for (p, t) in mapped.iter().zip(truth) {
        if let Some(t) = t {
            total += 1;
            if *p == Some(*t) {
                correct += 1;
            }
        }
    }
    Ok((correct, total))
}

pub fn mof(mapped: &[Option<usize>], truth: &[Option<usize>]) -> Result<f64> {
    let (c, t) = frame_counts(mapped, truth)?;
    Ok(if t == 0 { 0.0 } else { c as f64 / t as f64 })
}

/// Unweighted mean over activities.
pub fn moc(per_activity: &[f64]) -> Result<f64> {
    if per_activity.is_empty() {
        return Err(Error::Contract("mean over classes of zero activities".into()));
    }
    Ok(per_activity.iter().sum::<f64>() / per_activity.len() as f64)
}

/// Maximal runs `(label, start, end)` of equal non-`None` labels.
pub fn runs(labels: &[Option<usize>]) -> Vec<(usize, usize, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < labels.len() {
        let mut end = start + 1;
        while end < labels.len() && labels[end] == labels[start] {
            end += 1;
        }
        if let Some(l) = labels[start] {
            out.push((l, start, end));
        }
        start = end;
    }
    out
}

/// Segment-level detection counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentCounts {
    pub truth_segments: usize,
    pub predicted_segments: usize,
    pub credited: usize,
    pub claimed: usize,
}

impl SegmentCounts {
    pub fn add(&mut self, other: SegmentCounts) {
        self.truth_segments += other.truth_segments;
        self.predicted_segments += other.predicted_segments;
        self.credited += other.credited;
        self.claimed += other.claimed;
    }

    pub fn f1(&self) -> f64 {
        let precision = ratio(self.claimed, self.predicted_segments);
        let recall = ratio(self.credited, self.truth_segments);
        if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        }
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// A truth segment is credited when at least half of its frames carry its
/// label and its best-overlapping predicted run of that label is still
/// unclaimed; that run is then claimed.
pub fn segment_counts(mapped: &[Option<usize>], truth: &[Option<usize>]) -> Result<SegmentCounts> {
    if mapped.len() != truth.len() {
        return Err(Error::Contract(format!(
            "{} predicted frames against {} ground-truth frames",
            mapped.len(),
            truth.len()
        )));
    }
    let truth_runs = runs(truth);
    let pred_runs = runs(mapped);
    let mut claimed = vec![false; pred_runs.len()];
    let mut credited = 0;
    for &(label, start, end) in &truth_runs {
        let hits = mapped[start..end].iter().filter(|p| **p == Some(label)).count();
        if 2 * hits < end - start {
            continue;
        }
        let mut best: Option<(usize, usize)> = None;
        for (i, &(pl, ps, pe)) in pred_runs.iter().enumerate() {
            if pl != label {
                continue;
            }
            let overlap = pe.min(end).saturating_sub(ps.max(start));
            if overlap > 0 && best.is_none_or(|(_, o)| overlap > o) {
                best = Some((i, overlap));
            }
        }
        if let Some((i, _)) = best {
            if !claimed[i] {
                claimed[i] = true;
                credited += 1;
            }
        }
    }
    Ok(SegmentCounts {
        truth_segments: truth_runs.len(),
        predicted_segments: pred_runs.len(),
        credited,
        claimed: claimed.iter().filter(|c| **c).count(),
    })
}

pub fn f1(mapped: &[Option<usize>], truth: &[Option<usize>]) -> Result<f64> {
    Ok(segment_counts(mapped, truth)?.f1())
}

/// Everything needed to score one activity.
#[derive(Clone, Debug)]
pub struct ActivityEval {
    pub name: String,
    pub clusters: usize,
    pub frame_span: usize,
    pub truth: Vec<VideoTruth>,
    /// Segment-level cluster labels by video id; `None` is background.
    pub predictions: BTreeMap<String, Vec<Option<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MappingEntry {
    pub cluster: usize,
    pub class: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitMapping {
    pub unit: String,
    pub pairs: Vec<MappingEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActivityReport {
    pub name: String,
    pub mof: f64,
    pub f1: f64,
    pub correct_frames: usize,
    pub total_frames: usize,
    pub segments: SegmentCounts,
    pub mapping: Vec<UnitMapping>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub matching_mode: MatchingMode,
    pub background: Option<String>,
    pub activities: Vec<ActivityReport>,
    pub mof: f64,
    pub moc: f64,
    pub f1: f64,
}

impl EvalReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            path: "<report>".into(),
            message: e.to_string(),
        })
    }
}

struct PreparedVideo {
    id: String,
    pred: Vec<Option<usize>>,
    truth: Vec<Option<usize>>,
}

fn prepare(act: &ActivityEval, classes: &[String], background: Option<&str>) -> Vec<PreparedVideo> {
    let index: BTreeMap<&str, usize> = classes.iter().enumerate().map(|(i, c)| (c.as_str(), i)).collect();
    act.truth
        .iter()
        .map(|v| {
            let truth: Vec<Option<usize>> = v
                .frames
                .iter()
                .map(|t| if Some(t.as_str()) == background { None } else { index.get(t.as_str()).copied() })
                .collect();
            let pred = expand_to_frames(&act.predictions[&v.video_id], act.frame_span, v.frames.len());
            PreparedVideo {
                id: v.video_id.clone(),
                pred,
                truth,
            }
        })
        .collect()
}

fn unit_mapping(unit: &str, mapping: &[Option<usize>], classes: &[String]) -> UnitMapping {
    UnitMapping {
        unit: unit.to_string(),
        pairs: mapping
            .iter()
            .enumerate()
            .map(|(cluster, c)| MappingEntry {
                cluster,
                class: c.map(|c| classes[c].clone()),
            })
            .collect(),
    }
}

pub fn evaluate_activity(act: &ActivityEval, mode: MatchingMode, background: Option<&str>) -> Result<ActivityReport> {
    let classes = vocabulary(&act.truth, background);
    let videos = prepare(act, &classes, background);
    let mut mappings = Vec::new();
    let mut mapped_videos = Vec::new();
    match mode {
        MatchingMode::Activity => {
            let pairs: Vec<LabelPair> =
                videos.iter().map(|v| (v.pred.as_slice(), v.truth.as_slice())).collect();
            let mapping = match_overlap(&overlap_counts(&pairs, act.clusters, classes.len()))?;
            mappings.push(unit_mapping(&act.name, &mapping, &classes));
            for v in &videos {
                mapped_videos.push(apply_mapping(&v.pred, &mapping, classes.len()));
            }
        }
        MatchingMode::Video => {
            for v in &videos {
                let overlap = overlap_counts(&[(&v.pred, &v.truth)], act.clusters, classes.len());
                let mapping = match_overlap(&overlap)?;
                mappings.push(unit_mapping(&v.id, &mapping, &classes));
                mapped_videos.push(apply_mapping(&v.pred, &mapping, classes.len()));
            }
        }
    }
    let (mut correct, mut total) = (0, 0);
    let mut segments = SegmentCounts::default();
    for (v, mapped) in videos.iter().zip(&mapped_videos) {
        let (c, t) = frame_counts(mapped, &v.truth)?;
        correct += c;
        total += t;
        segments.add(segment_counts(mapped, &v.truth)?);
    }
    if total == 0 {
        return Err(Error::DegenerateData(format!(
            "activity {} has no foreground ground-truth frames",
            act.name
        )));
    }
    Ok(ActivityReport {
        name: act.name.clone(),
        mof: correct as f64 / total as f64,
        f1: segments.f1(),
        correct_frames: correct,
        total_frames: total,
        segments,
        mapping: mappings,
    })
}

/// Scores every activity; truth videos without predictions are reported together.
pub fn evaluate(activities: &[ActivityEval], mode: MatchingMode, background: Option<&str>) -> Result<EvalReport> {
    let missing: Vec<String> = activities
        .iter()
        .flat_map(|a| a.truth.iter().filter(|v| !a.predictions.contains_key(&v.video_id)))
        .map(|v| v.video_id.clone())
        .collect();
    if !missing.is_empty() {
        return Err(Error::Inventory(missing));
    }
    let reports = activities
        .iter()
        .map(|a| evaluate_activity(a, mode, background))
        .collect::<Result<Vec<_>>>()?;
    let correct: usize = reports.iter().map(|r| r.correct_frames).sum();
    let total: usize = reports.iter().map(|r| r.total_frames).sum();
    let per: Vec<f64> = reports.iter().map(|r| r.mof).collect();
    let f1_mean = reports.iter().map(|r| r.f1).sum::<f64>() / reports.len().max(1) as f64;
    Ok(EvalReport {
        matching_mode: mode,
        background: background.map(str::to_string),
        mof: if total == 0 { 0.0 } else { correct as f64 / total as f64 },
        moc: moc(&per)?,
        f1: f1_mean,
        activities: reports,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::Rng;

    fn some(v: &[usize]) -> Vec<Option<usize>> {
        v.iter().map(|&x| Some(x)).collect()
    }

    fn truth(id: &str, tokens: &[&str]) -> VideoTruth {
        VideoTruth {
            video_id: id.into(),
            frames: tokens.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn mof_examples() {
        assert_eq!(mof(&some(&[0, 1, 1, 0]), &some(&[0, 1, 1, 1])).unwrap(), 0.75);
        assert_eq!(mof(&some(&[2, 2]), &some(&[2, 2])).unwrap(), 1.0);
        assert!(matches!(mof(&some(&[0]), &some(&[0, 1])), Err(Error::Contract(_))));
    }

    #[test]
    fn background_truth_frames_are_skipped() {
        assert_eq!(frame_counts(&[Some(0), None, Some(1)], &[Some(0), None, Some(0)]).unwrap(), (1, 2));
    }

    #[test]
    fn pooled_mof_differs_from_moc() {
        let pooled = (90 + 150) as f64 / (100 + 300) as f64;
        assert_eq!(pooled, 0.6);
        assert_eq!(moc(&[0.9, 0.5]).unwrap(), 0.7);
        assert_eq!(moc(&[0.9, 0.45]).unwrap(), 0.675);
        assert_eq!(moc(&[0.42]).unwrap(), 0.42);
        assert!(moc(&[]).is_err());
    }

    #[test]
    fn f1_examples() {
        assert_eq!(f1(&some(&[0, 0, 1, 1]), &some(&[0, 0, 1, 1])).unwrap(), 1.0);
        let c = segment_counts(&some(&[0, 0, 0, 0, 5, 5, 6, 6]), &some(&[0, 0, 0, 0, 1, 1, 1, 1])).unwrap();
        assert_eq!((c.truth_segments, c.predicted_segments, c.credited, c.claimed), (2, 3, 1, 1));
        assert!((c.f1() - 0.4).abs() < 1e-12);
        // exactly half of each truth segment covered still counts
        let half = segment_counts(&some(&[0, 0, 1, 1, 1, 1, 2, 2]), &some(&[0, 0, 0, 0, 1, 1, 1, 1])).unwrap();
        assert_eq!(half.credited, 2);
        assert_eq!(f1(&[None, None], &some(&[0, 0])).unwrap(), 0.0);
    }

    #[test]
    fn a_run_detects_at_most_one_segment() {
        // one long prediction spanning two truth segments of the same class
        let c = segment_counts(&some(&[0; 6]), &[Some(0), Some(0), None, None, Some(0), Some(0)]).unwrap();
        assert_eq!((c.truth_segments, c.credited, c.claimed), (2, 1, 1));
    }

    #[test]
    fn segment_majority_and_tie_rule() {
        let mut frames = vec!["a"; 8];
        frames.extend(["b"; 8]);
        assert_eq!(truth("v", &frames).segment_labels(8), vec!["a", "b"]);
        let tie = truth("v", &["a", "a", "a", "b", "b", "b", "b", "a"]);
        assert_eq!(tie.segment_labels(8), vec!["a"]);
        let odd = truth("v", &["c"; 17]);
        assert_eq!(odd.segment_labels(8).len(), 3);
    }

    #[test]
    fn expansion_truncates_and_pads() {
        assert_eq!(expand_to_frames(&some(&[1, 2]), 2, 3), some(&[1, 1, 2]));
        assert_eq!(expand_to_frames(&some(&[1]), 2, 3), vec![Some(1), Some(1), None]);
    }

    fn activity(name: &str, truth_v: Vec<VideoTruth>, preds: Vec<(&str, Vec<Option<usize>>)>, clusters: usize) -> ActivityEval {
        ActivityEval {
            name: name.into(),
            clusters,
            frame_span: 1,
            truth: truth_v,
            predictions: preds.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        }
    }

    #[test]
    fn permuted_predictions_score_perfectly() {
        let act = activity(
            "tea",
            vec![truth("v1", &["x", "x", "y", "z"])],
            vec![("v1", some(&[2, 2, 0, 1]))],
            3,
        );
        let r = evaluate(&[act], MatchingMode::Activity, None).unwrap();
        assert_eq!((r.mof, r.moc, r.f1), (1.0, 1.0, 1.0));
        let pairs = &r.activities[0].mapping[0].pairs;
        assert_eq!(pairs[2].class.as_deref(), Some("x"));
        assert_eq!(pairs[0].class.as_deref(), Some("y"));
    }

    #[test]
    fn unused_cluster_maps_through_padding() {
        let act = activity(
            "a",
            vec![truth("v", &["x", "x", "y", "y"])],
            vec![("v", some(&[0, 0, 2, 2]))],
            3,
        );
        let r = evaluate(&[act], MatchingMode::Activity, None).unwrap();
        assert_eq!(r.mof, 1.0);
        assert_eq!(r.activities[0].mapping[0].pairs[1].class, None);
    }

    #[test]
    fn video_matching_handles_swapped_roles() {
        let make = || {
            activity(
                "a",
                vec![truth("v1", &["x", "x", "y", "y"]), truth("v2", &["x", "x", "y", "y"])],
                vec![("v1", some(&[0, 0, 1, 1])), ("v2", some(&[1, 1, 0, 0]))],
                2,
            )
        };
        let act_mode = evaluate(&[make()], MatchingMode::Activity, None).unwrap();
        let vid_mode = evaluate(&[make()], MatchingMode::Video, None).unwrap();
        assert_eq!(act_mode.mof, 0.5);
        assert_eq!(vid_mode.mof, 1.0);
        assert_eq!(vid_mode.activities[0].mapping.len(), 2);
    }

    #[test]
    fn pooled_and_class_means_on_unequal_activities() {
        let tiny = |id: &str, n: usize, correct: usize| {
            let frames: Vec<&str> = (0..n).map(|i| if i % 2 == 0 { "x" } else { "y" }).collect();
            let pred: Vec<Option<usize>> = (0..n)
                .map(|i| if i < correct { Some(i % 2) } else { Some(2) })
                .collect();
            activity(id, vec![truth(id, &frames)], vec![(id, pred)], 3)
        };
        let r = evaluate(&[tiny("a", 100, 90), tiny("b", 300, 150)], MatchingMode::Activity, None).unwrap();
        assert_eq!(r.activities[0].mof, 0.9);
        assert_eq!(r.activities[1].mof, 0.5);
        assert_eq!(r.mof, 0.6);
        assert_eq!(r.moc, 0.7);
    }

    #[test]
    fn missing_videos_are_listed() {
        let act = activity("a", vec![truth("v1", &["x"]), truth("v2", &["x"])], vec![("v1", some(&[0]))], 2);
        match evaluate(&[act], MatchingMode::Activity, None) {
            Err(Error::Inventory(ids)) => assert_eq!(ids, vec!["v2".to_string()]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn report_round_trips() {
        let act = activity("a", vec![truth("v", &["x", "y", "y"])], vec![("v", some(&[0, 1, 0]))], 2);
        let r = evaluate(&[act], MatchingMode::Activity, None).unwrap();
        let text = r.to_json();
        let back = EvalReport::from_json(&text).unwrap();
        assert_eq!(back, r);
        assert_eq!(back.to_json(), text);
    }

    #[test]
    fn matched_mapping_beats_identity() {
        let mut rng = Rng::new(3, 0);
        for _ in 0..30 {
            let n = 40;
            let t: Vec<Option<usize>> = (0..n).map(|_| Some(rng.below(4))).collect();
            let p: Vec<Option<usize>> = (0..n).map(|_| Some(rng.below(4))).collect();
            let mapping = match_overlap(&overlap_counts(&[(&p, &t)], 4, 4)).unwrap();
            let matched = mof(&apply_mapping(&p, &mapping, 4), &t).unwrap();
            let identity = mof(&p, &t).unwrap();
            assert!(matched >= identity);
        }
    }

    #[test]
    fn uniform_random_predictions_score_at_least_chance() {
        let mut rng = Rng::new(99, 0);
        let k = 5;
        let frames: Vec<String> = (0..20_000).map(|i| format!("c{}", i * k / 20_000)).collect();
        let t = VideoTruth {
            video_id: "v".into(),
            frames,
        };
        let pred: Vec<Option<usize>> = (0..20_000).map(|_| Some(rng.below(k))).collect();
        let act = ActivityEval {
            name: "a".into(),
            clusters: k,
            frame_span: 1,
            truth: vec![t],
            predictions: [("v".to_string(), pred)].into_iter().collect(),
        };
        let r = evaluate(&[act], MatchingMode::Activity, None).unwrap();
        let chance = 1.0 / k as f64;
        assert!(r.mof >= chance - 0.05 && r.mof <= chance + 0.05, "{}", r.mof);
    }

    #[test]
    fn metrics_ignore_cluster_relabeling() {
        let t = truth("v", &["x", "x", "y", "z", "z", "y"]);
        let base = some(&[0, 0, 1, 2, 1, 1]);
        let relabeled: Vec<Option<usize>> = base.iter().map(|p| p.map(|k| (k + 1) % 3)).collect();
        let a = evaluate(&[activity("a", vec![t.clone()], vec![("v", base)], 3)], MatchingMode::Activity, None).unwrap();
        let b = evaluate(&[activity("a", vec![t], vec![("v", relabeled)], 3)], MatchingMode::Activity, None).unwrap();
        assert_eq!((a.mof, a.f1), (b.mof, b.f1));
    }
}
