//! Per-video feature matrices.
//!
//! Binary layout, all little-endian:
//!
//! | bytes | field |
//! |-------|-------|
//! | 4     | magic `VFEA` |
//! | 4     | version, `u32` = 1 |
//! | 4     | segments `M`, `u32` |
//! | 4     | dimension `D`, `u32` |
//! | 4·M·D | `f32` values, row-major |
//!
//! A text fallback starts with a `D=<int>` line followed by one
//! whitespace-separated row per segment.

use std::path::Path;

use super::{read_bytes, write_bytes};
use crate::error::{Error, Result};
use crate::numerics::Matrix;

pub const MAGIC: &[u8; 4] = b"VFEA";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

fn format_err(path: &Path, offset: usize, message: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        offset: offset as u64,
        message: message.into(),
    }
}

pub fn encode_vfea(features: &Matrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * features.data().len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(features.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(features.cols() as u32).to_le_bytes());
    for v in features.data() {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

fn read_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("four bytes"))
}

pub fn decode_vfea(bytes: &[u8], path: &Path) -> Result<Matrix> {
    if bytes.len() < HEADER_LEN {
        return Err(format_err(
            path,
            bytes.len(),
            format!("header needs {HEADER_LEN} bytes, file has {}", bytes.len()),
        ));
    }
    if &bytes[..4] != MAGIC {
        return Err(format_err(path, 0, "bad magic, expected VFEA"));
    }
    let version = read_u32(bytes, 4);
    if version != VERSION {
        return Err(format_err(path, 4, format!("unsupported version {version}")));
    }
    let rows = read_u32(bytes, 8) as usize;
    let cols = read_u32(bytes, 12) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(4))
        .and_then(|n| n.checked_add(HEADER_LEN))
        .ok_or_else(|| format_err(path, 8, "declared size overflows"))?;
    if bytes.len() != expected {
        return Err(format_err(
            path,
            bytes.len().min(expected),
            format!("expected {expected} bytes for {rows}x{cols} payload, found {}", bytes.len()),
        ));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for (i, chunk) in bytes[HEADER_LEN..].chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes(chunk.try_into().expect("four bytes"));
        if !v.is_finite() {
            return Err(format_err(path, HEADER_LEN + 4 * i, format!("non-finite value {v}")));
        }
        data.push(v as f64);
    }
    Matrix::from_vec(rows, cols, data)
}

pub fn encode_tsv(features: &Matrix) -> String {
    let mut out = format!("D={}\n", features.cols());
    for row in features.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    out
}

pub fn decode_tsv(text: &str, path: &Path) -> Result<Matrix> {
    let mut offset = 0;
    let mut lines = text.split_inclusive('\n');
    let header = lines.next().unwrap_or("");
    let cols: usize = header
        .trim()
        .strip_prefix("D=")
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(|| format_err(path, 0, "expected VFEA magic or a `D=<int>` header"))?;
    offset += header.len();
    let mut data = Vec::new();
    let mut rows = 0;
    for line in lines {
        let mut count = 0;
        for (at, token) in tokens(line) {
            let at = offset + at;
            let v: f64 = token
                .parse()
                .map_err(|_| format_err(path, at, format!("`{token}` is not a number")))?;
            if !v.is_finite() {
                return Err(format_err(path, at, format!("non-finite value {token}")));
            }
            data.push(v);
            count += 1;
        }
        if count != 0 && count != cols {
            return Err(format_err(path, offset, format!("row has {count} values, expected {cols}")));
        }
        if count > 0 {
            rows += 1;
        }
        offset += line.len();
    }
    Matrix::from_vec(rows, cols, data)
}

/// Whitespace-separated tokens with their byte offsets.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = 0;
    std::iter::from_fn(move || {
        let tail = &line[rest..];
        let start = rest + tail.find(|c: char| !c.is_whitespace())?;
        let len = line[start..].find(char::is_whitespace).unwrap_or(line.len() - start);
        rest = start + len;
        Some((start, &line[start..start + len]))
    })
}

/// Reads either layout, chosen by the leading bytes.
pub fn load_features(path: &Path) -> Result<Matrix> {
    let bytes = read_bytes(path)?;
    if bytes.starts_with(MAGIC) {
        return decode_vfea(&bytes, path);
    }
    match std::str::from_utf8(&bytes) {
        Ok(text) if text.trim_start().starts_with("D=") => decode_tsv(text, path),
        _ => Err(format_err(path, 0, "bad magic, expected VFEA")),
    }
}

pub fn write_features(path: &Path, features: &Matrix) -> Result<()> {
    write_bytes(path, &encode_vfea(features))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn known_bytes_decode() {
        let mut bytes = b"VFEA".to_vec();
        for v in [1u32, 2, 3] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        for v in [1.0f32, 2.0, 3.0, -0.5, 0.25, 8.0] {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        let m = decode_vfea(&bytes, p()).unwrap();
        assert_eq!(m.shape(), (2, 3));
        assert_eq!(m.data(), &[1.0, 2.0, 3.0, -0.5, 0.25, 8.0]);
    }

    #[test]
    fn truncation_names_both_sizes() {
        let m = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let bytes = encode_vfea(&m);
        let msg = decode_vfea(&bytes[..bytes.len() - 3], p()).unwrap_err().to_string();
        assert!(msg.contains("expected 24") && msg.contains("found 21"), "{msg}");
    }

    #[test]
    fn nan_and_magic_errors_carry_offsets() {
        let m = Matrix::from_rows(&[[1.0, f64::NAN]]).unwrap();
        match decode_vfea(&encode_vfea(&m), p()) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 20),
            other => panic!("{other:?}"),
        }
        match decode_vfea(b"XXXXaaaabbbbcccc", p()) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn tsv_fallback() {
        let m = decode_tsv("D=2\n1 2\n3\t4\n", p()).unwrap();
        assert_eq!(m.data(), &[1.0, 2.0, 3.0, 4.0]);
        match decode_tsv("D=2\n1 2\n3 x\n", p()) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 10),
            other => panic!("{other:?}"),
        }
        assert!(decode_tsv("D=2\n1 2 3\n", p()).is_err());
    }

    #[test]
    fn files_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let m = Matrix::from_rows(&[[0.5, -1.25], [3.0, 4.0]]).unwrap();
        let bin = dir.path().join("a.vfea");
        write_features(&bin, &m).unwrap();
        assert_eq!(load_features(&bin).unwrap(), m);
        let txt = dir.path().join("a.tsv");
        std::fs::write(&txt, encode_tsv(&m)).unwrap();
        assert_eq!(load_features(&txt).unwrap(), m);
    }

    proptest! {
        #[test]
        fn binary_round_trip(rows in 0usize..6, cols in 1usize..6, seed in any::<u64>()) {
            let mut rng = crate::numerics::Rng::new(seed, 0);
            // values representable in f32 survive exactly
            let data = (0..rows * cols).map(|_| rng.uniform(-100.0, 100.0) as f32 as f64).collect();
            let m = Matrix::from_vec(rows, cols, data).unwrap();
            prop_assert_eq!(decode_vfea(&encode_vfea(&m), p()).unwrap(), m.clone());
            if rows > 0 {
                prop_assert_eq!(decode_tsv(&encode_tsv(&m), p()).unwrap(), m);
            }
        }
    }
}
