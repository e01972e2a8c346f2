//! Feature-matrix file formats.
//!
//! CSV: one row per feature, one column per frame, no header. Labels live in
//! a companion file holding `N` integers, either on one line or one per line.
//!
//! Binary (all little-endian):
//!
//! ```text
//! "GCRL"            4-byte magic
//! u32 version       currently 1
//! u32 n             feature dimension
//! u32 N             frame count
//! f64 * n*N         entries, column-major (frame after frame)
//! [u32 count        optional label block; count == N
//!  i64 * count]
//! ```

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::data::{FeatureSequence, Mat};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"GCRL";
pub const VERSION: u32 = 1;

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

pub fn read_matrix_csv(path: &Path) -> Result<Mat> {
    let bytes = read_bytes(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(bytes.as_slice());
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::format(path, format!("row {}: {e}", r + 1)))?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let mut row = Vec::with_capacity(record.len());
        for (c, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| {
                Error::format(path, format!("row {}, column {}: cannot parse {field:?} as a number", r + 1, c + 1))
            })?;
            if !v.is_finite() {
                return Err(Error::format(path, format!("row {}, column {}: non-finite value {field}", r + 1, c + 1)));
            }
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::format(
                    path,
                    format!("row {} has {} columns, expected {}", r + 1, row.len(), first.len()),
                ));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::format(path, "no data rows"));
    }
    let cols = rows[0].len();
    Ok(Mat::from_fn(rows.len(), cols, |r, c| rows[r][c]))
}

pub fn read_labels_csv(path: &Path) -> Result<Vec<i64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, s)| {
            s.parse::<i64>()
                .map_err(|_| Error::format(path, format!("label {}: cannot parse {s:?} as an integer", i + 1)))
        })
        .collect()
}

pub fn write_matrix_csv(path: &Path, x: &Mat) -> Result<()> {
    let mut out = String::new();
    for r in 0..x.nrows() {
        let row: Vec<String> = x.row(r).iter().map(|v| format!("{v}")).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

pub fn write_labels_csv(path: &Path, labels: &[i64]) -> Result<()> {
    let line: Vec<String> = labels.iter().map(|l| l.to_string()).collect();
    fs::write(path, line.join(",") + "\n").map_err(|e| Error::io(path, e))
}

pub fn encode_binary(x: &Mat, labels: Option<&[i64]>) -> Vec<u8> {
    let mut buf = Vec::with_capacity(16 + 8 * x.len());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(x.nrows() as u32).to_le_bytes());
    buf.extend_from_slice(&(x.ncols() as u32).to_le_bytes());
    // nalgebra storage is column-major already.
    for v in x.iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    if let Some(labels) = labels {
        buf.extend_from_slice(&(labels.len() as u32).to_le_bytes());
        for l in labels {
            buf.extend_from_slice(&l.to_le_bytes());
        }
    }
    buf
}

pub fn decode_binary(path: &Path, bytes: &[u8]) -> Result<(Mat, Option<Vec<i64>>)> {
    if bytes.len() < 16 || &bytes[..4] != MAGIC {
        return Err(Error::format(path, "malformed header: missing GCRL magic"));
    }
    let word = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap());
    let version = word(4);
    if version != VERSION {
        return Err(Error::format(path, format!("malformed header: unsupported version {version}")));
    }
    let n = word(8) as usize;
    let frames = word(12) as usize;
    let body = n
        .checked_mul(frames)
        .and_then(|c| c.checked_mul(8))
        .ok_or_else(|| Error::format(path, "malformed header: dimensions overflow"))?;
    if bytes.len() < 16 + body {
        return Err(Error::format(
            path,
            format!("dimension mismatch: header declares {n}x{frames} but file holds {} data bytes", bytes.len() - 16),
        ));
    }
    let mut data = Vec::with_capacity(n * frames);
    for (i, chunk) in bytes[16..16 + body].chunks_exact(8).enumerate() {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(Error::format(path, format!("non-finite entry at row {}, column {}", i % n + 1, i / n + 1)));
        }
        data.push(v);
    }
    let x = Mat::from_vec(n, frames, data);

    let rest = &bytes[16 + body..];
    if rest.is_empty() {
        return Ok((x, None));
    }
    if rest.len() < 4 {
        return Err(Error::format(path, "truncated label block"));
    }
    let count = u32::from_le_bytes(rest[..4].try_into().unwrap()) as usize;
    if count != frames {
        return Err(Error::format(path, format!("dimension mismatch: {count} labels for {frames} frames")));
    }
    if rest.len() != 4 + 8 * count {
        return Err(Error::format(path, "label block length does not match its count"));
    }
    let labels = rest[4..].chunks_exact(8).map(|c| i64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok((x, Some(labels)))
}

pub fn write_binary(path: &Path, seq: &FeatureSequence) -> Result<()> {
    let bytes = encode_binary(&seq.features, seq.labels.as_deref());
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&bytes).map_err(|e| Error::io(path, e))
}

/// Load a feature file without normalizing it. Binary files are recognized by
/// their magic bytes, anything else is parsed as CSV.
pub fn read_raw(path: &Path, labels: Option<&Path>) -> Result<FeatureSequence> {
    let bytes = read_bytes(path)?;
    let (x, mut embedded) = if bytes.starts_with(MAGIC) {
        decode_binary(path, &bytes)?
    } else {
        (read_matrix_csv(path)?, None)
    };
    if let Some(lp) = labels {
        embedded = Some(read_labels_csv(lp)?);
    }
    if let Some(l) = &embedded {
        if l.len() != x.ncols() {
            let at = labels.unwrap_or(path);
            return Err(Error::format(at, format!("dimension mismatch: {} labels for {} frames", l.len(), x.ncols())));
        }
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    FeatureSequence::new(x, embedded, name)
}

/// Load and min-max normalize a feature file.
pub fn ingest(path: &Path, labels: Option<&Path>) -> Result<FeatureSequence> {
    read_raw(path, labels)?.normalized()
}
