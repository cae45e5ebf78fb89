//! From per-segment confidences to ordered, temporally coherent labelings.

use serde::{Deserialize, Serialize};

use crate::dlcl::argmax;
use crate::encoding::FeatureSequence;
use crate::error::{Error, Result};
use crate::numerics::Matrix;
use crate::trainer::TrainedModel;

/// Left-to-right transition model over temporally ordered sets.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionModel {
    pub order: Vec<usize>,
    /// Row `i` holds `P(j | i)`.
    pub trans: Matrix,
    pub terminal: usize,
}

/// Fraction of least confident segments treated as background.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BackgroundPolicy {
    pub ratio: f64,
}

impl BackgroundPolicy {
    pub fn new(ratio: f64) -> Result<Self> {
        let p = BackgroundPolicy { ratio };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.ratio) {
            return Err(Error::Config(format!(
                "background ratio must be in [0, 1), got {}",
                self.ratio
            )));
        }
        Ok(())
    }

    pub fn is_active(&self) -> bool {
        self.ratio > 0.0
    }
}

/// Labels of one video; `None` marks background.
#[derive(Clone, Debug, PartialEq)]
pub struct VideoLabeling {
    pub video_id: String,
    pub initial_labels: Vec<Option<usize>>,
    pub decoded_labels: Vec<Option<usize>>,
    pub confidences: Matrix,
    pub background_mask: Vec<bool>,
}

impl VideoLabeling {
    /// Argmax labels, no background, decoding still pending.
    pub fn from_confidences(video_id: impl Into<String>, confidences: Matrix) -> Self {
        let initial: Vec<Option<usize>> = confidences.row_iter().map(|r| Some(argmax(r))).collect();
        let n = initial.len();
        VideoLabeling {
            video_id: video_id.into(),
            decoded_labels: initial.clone(),
            initial_labels: initial,
            confidences,
            background_mask: vec![false; n],
        }
    }

    pub fn len(&self) -> usize {
        self.initial_labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.initial_labels.is_empty()
    }
}

/// Segmentation of one activity.
#[derive(Clone, Debug, PartialEq)]
pub struct Segmentation {
    pub transitions: TransitionModel,
    pub videos: Vec<VideoLabeling>,
}

/// Argmax labels and the full confidence matrix of one video.
pub fn initial_predictions(model: &TrainedModel, seq: &FeatureSequence) -> Result<(Vec<usize>, Matrix)> {
    let conf = model.confidences(seq)?;
    let labels = conf.row_iter().map(argmax).collect();
    Ok((labels, conf))
}

/// Masks the `⌊ratio·total⌋` segments of lowest maximum confidence across
/// all videos; ties go to the earlier video, then the earlier segment.
pub fn apply_background(labelings: &mut [VideoLabeling], policy: &BackgroundPolicy) -> Result<usize> {
    policy.validate()?;
    let mut ranked: Vec<(f64, usize, usize)> = Vec::new();
    for (v, lab) in labelings.iter().enumerate() {
        for (m, row) in lab.confidences.row_iter().enumerate() {
            let top = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            ranked.push((top, v, m));
        }
    }
    let count = (policy.ratio * ranked.len() as f64).floor() as usize;
    ranked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for lab in labelings.iter_mut() {
        lab.background_mask.fill(false);
        for (i, l) in lab.initial_labels.iter_mut().enumerate() {
            *l = Some(argmax(lab.confidences.row(i)));
        }
    }
    for &(_, v, m) in &ranked[..count] {
        let lab = &mut labelings[v];
        lab.background_mask[m] = true;
        lab.initial_labels[m] = None;
        lab.decoded_labels[m] = None;
    }
    Ok(count)
}

/// Mean normalized position `m/M_n` of each set over foreground initial labels.
pub fn set_mean_positions(labelings: &[VideoLabeling], sets: usize) -> Vec<Option<f64>> {
    let mut sums = vec![0.0; sets];
    let mut counts = vec![0usize; sets];
    for lab in labelings {
        let len = lab.len() as f64;
        for (m, l) in lab.initial_labels.iter().enumerate() {
            if let Some(k) = *l {
                if k < sets {
                    sums[k] += m as f64 / len;
                    counts[k] += 1;
                }
            }
        }
    }
    sums.iter()
        .zip(&counts)
        .map(|(&s, &c)| (c > 0).then(|| s / c as f64))
        .collect()
}

/// Sets sorted by ascending mean position; empty sets last; ties by index.
pub fn order_from_means(means: &[Option<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..means.len()).collect();
    order.sort_by(|&a, &b| match (means[a], means[b]) {
        (Some(x), Some(y)) => x.total_cmp(&y).then(a.cmp(&b)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.cmp(&b),
    });
    order
}

pub fn order_sets(labelings: &[VideoLabeling], sets: usize) -> Vec<usize> {
    order_from_means(&set_mean_positions(labelings, sets))
}

/// Stay or advance with probability one half each; the last set absorbs.
pub fn build_transitions(order: &[usize]) -> Result<TransitionModel> {
    let k = order.len();
    let mut seen = vec![false; k];
    for &s in order {
        if s >= k || seen[s] {
            return Err(Error::Contract(format!("{order:?} is not a permutation of 0..{k}")));
        }
        seen[s] = true;
    }
    let terminal = *order
        .last()
        .ok_or_else(|| Error::Contract("ordering is empty".into()))?;
    let mut trans = Matrix::zeros(k, k);
    for pair in order.windows(2) {
        trans.set(pair[0], pair[0], 0.5);
        trans.set(pair[0], pair[1], 0.5);
    }
    trans.set(terminal, terminal, 1.0);
    Ok(TransitionModel {
        order: order.to_vec(),
        trans,
        terminal,
    })
}

/// Log-probability of `labels` given transitions, confidences and a start at `order[0]`.
pub fn path_log_prob(tm: &TransitionModel, confidences: &Matrix, labels: &[usize]) -> f64 {
    let Some(&first) = labels.first() else {
        return 0.0;
    };
    if first != tm.order[0] {
        return f64::NEG_INFINITY;
    }
    let mut lp = confidences.get(0, first).ln();
    for m in 1..labels.len() {
        lp += tm.trans.get(labels[m - 1], labels[m]).ln() + confidences.get(m, labels[m]).ln();
    }
    lp
}

/// Most probable label path under the transition model, starting at `order[0]`.
pub fn viterbi_decode(tm: &TransitionModel, confidences: &Matrix) -> Result<(Vec<usize>, f64)> {
    let (len, k) = confidences.shape();
    if k != tm.order.len() {
        return Err(Error::Contract(format!(
            "confidences have {k} columns, transition model {} states",
            tm.order.len()
        )));
    }
    if len == 0 {
        return Err(Error::Contract("cannot decode an empty video".into()));
    }
    for (m, row) in confidences.row_iter().enumerate() {
        let s: f64 = row.iter().sum();
        if (s - 1.0).abs() > 1e-9 || row.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Contract(format!("confidence row {m} is not a distribution")));
        }
    }
    let log_trans: Vec<f64> = tm.trans.data().iter().map(|p| p.ln()).collect();
    let mut score = vec![f64::NEG_INFINITY; k];
    score[tm.order[0]] = confidences.get(0, tm.order[0]).ln();
    let mut back = vec![0usize; len * k];
    for m in 1..len {
        let mut next = vec![f64::NEG_INFINITY; k];
        for to in 0..k {
            let emit = confidences.get(m, to).ln();
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0;
            for from in 0..k {
                let cand = score[from] + log_trans[from * k + to];
                if cand > best {
                    best = cand;
                    arg = from;
                }
            }
            next[to] = best + emit;
            back[m * k + to] = arg;
        }
        if next.iter().all(|v| *v == f64::NEG_INFINITY) {
            return Err(Error::Decoding(format!("no feasible path reaches segment {m}")));
        }
        score = next;
    }
    let (mut state, &best) = score
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |acc, (i, v)| if *v > *acc.1 { (i, v) } else { acc });
    if best == f64::NEG_INFINITY {
        return Err(Error::Decoding("every path has zero probability".into()));
    }
    let mut path = vec![0; len];
    for m in (0..len).rev() {
        path[m] = state;
        if m > 0 {
            state = back[m * k + state];
        }
    }
    Ok((path, best))
}

/// Decodes the foreground of one video and splices background back in.
pub fn decode_video(tm: &TransitionModel, lab: &mut VideoLabeling) -> Result<f64> {
    let fg: Vec<usize> = (0..lab.len()).filter(|&m| !lab.background_mask[m]).collect();
    lab.decoded_labels = vec![None; lab.len()];
    if fg.is_empty() {
        return Ok(0.0);
    }
    let mut sub = Matrix::zeros(fg.len(), lab.confidences.cols());
    for (i, &m) in fg.iter().enumerate() {
        sub.row_mut(i).copy_from_slice(lab.confidences.row(m));
    }
    let (path, lp) = viterbi_decode(tm, &sub).map_err(|e| match e {
        Error::Decoding(msg) => Error::Decoding(format!("video {}: {msg}", lab.video_id)),
        other => other,
    })?;
    for (&m, s) in fg.iter().zip(path) {
        lab.decoded_labels[m] = Some(s);
    }
    Ok(lp)
}

/// Background masking, ordering, transition model and decoding for one activity.
pub fn segment_labelings(mut videos: Vec<VideoLabeling>, sets: usize, policy: &BackgroundPolicy) -> Result<Segmentation> {
    apply_background(&mut videos, policy)?;
    let order = order_sets(&videos, sets);
    let transitions = build_transitions(&order)?;
    for lab in videos.iter_mut() {
        decode_video(&transitions, lab)?;
    }
    Ok(Segmentation { transitions, videos })
}

pub fn segment_activity(model: &TrainedModel, seqs: &[FeatureSequence], policy: &BackgroundPolicy) -> Result<Segmentation> {
    let videos = seqs
        .iter()
        .map(|s| Ok(VideoLabeling::from_confidences(s.video_id.clone(), model.confidences(s)?)))
        .collect::<Result<Vec<_>>>()?;
    segment_labelings(videos, model.bank.count(), policy)
}
