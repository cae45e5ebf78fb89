//! Frame-level ground truth: one label token per line.

use std::path::Path;

use super::{read_text, write_bytes};
use crate::error::{Error, Result};
use crate::evaluator::VideoTruth;

pub fn parse_ground_truth(text: &str, video_id: &str, path: &Path) -> Result<VideoTruth> {
    let mut frames = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let token = line.trim();
        if token.split_whitespace().count() > 1 {
            return Err(Error::Format {
                path: path.to_path_buf(),
                offset: offset as u64,
                message: format!("expected one label per line, got `{token}`"),
            });
        }
        if !token.is_empty() {
            frames.push(token.to_string());
        }
        offset += line.len();
    }
    if frames.is_empty() {
        return Err(Error::Format {
            path: path.to_path_buf(),
            offset: 0,
            message: "ground truth has no frames".into(),
        });
    }
    Ok(VideoTruth {
        video_id: video_id.to_string(),
        frames,
    })
}

pub fn load_ground_truth(path: &Path, video_id: &str) -> Result<VideoTruth> {
    parse_ground_truth(&read_text(path)?, video_id, path)
}

/// Majority label of every `frame_span` frames.
pub fn load_segment_labels(path: &Path, frame_span: usize) -> Result<Vec<String>> {
    Ok(load_ground_truth(path, "")?.segment_labels(frame_span))
}

pub fn encode_ground_truth(truth: &VideoTruth) -> String {
    let mut out = String::new();
    for t in &truth.frames {
        out.push_str(t);
        out.push('\n');
    }
    out
}

pub fn write_ground_truth(path: &Path, truth: &VideoTruth) -> Result<()> {
    write_bytes(path, encode_ground_truth(truth).as_bytes())
}
