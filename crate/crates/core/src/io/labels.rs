//! Per-video label files.
//!
//! One line per segment, `initial<TAB>decoded`, each a concept index or `-`
//! for background.

use std::path::Path;

use super::{read_text, write_bytes};
use crate::error::{Error, Result};
use crate::segmenter::VideoLabeling;

pub const BACKGROUND_TOKEN: &str = "-";

fn token(label: Option<usize>) -> String {
    label.map_or_else(|| BACKGROUND_TOKEN.to_string(), |l| l.to_string())
}

pub fn encode_labels(lab: &VideoLabeling) -> String {
    let mut out = String::new();
    for (i, d) in lab.initial_labels.iter().zip(&lab.decoded_labels) {
        out.push_str(&token(*i));
        out.push('\t');
        out.push_str(&token(*d));
        out.push('\n');
    }
    out
}

/// Initial and decoded labels read back from [`encode_labels`] output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelFile {
    pub initial: Vec<Option<usize>>,
    pub decoded: Vec<Option<usize>>,
}

pub fn decode_labels(text: &str, path: &Path) -> Result<LabelFile> {
    let mut file = LabelFile {
        initial: Vec::new(),
        decoded: Vec::new(),
    };
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let fields: Vec<&str> = line.split_whitespace().collect();
        let parse = |f: &str| -> Result<Option<usize>> {
            if f == BACKGROUND_TOKEN {
                return Ok(None);
            }
            f.parse().map(Some).map_err(|_| Error::Format {
                path: path.to_path_buf(),
                offset: offset as u64,
                message: format!("`{f}` is not a label"),
            })
        };
        match fields.as_slice() {
            [] => {}
            [i, d] => {
                file.initial.push(parse(i)?);
                file.decoded.push(parse(d)?);
            }
            _ => {
                return Err(Error::Format {
                    path: path.to_path_buf(),
                    offset: offset as u64,
                    message: "expected two label columns".into(),
                })
            }
        }
        offset += line.len();
    }
    Ok(file)
}

pub fn write_labels(path: &Path, lab: &VideoLabeling) -> Result<()> {
    write_bytes(path, encode_labels(lab).as_bytes())
}

pub fn load_labels(path: &Path) -> Result<LabelFile> {
    decode_labels(&read_text(path)?, path)
}
