//! The `DMAT1` text format.
//!
//! ```text
//! DMAT1 <rows> <cols>
//! <16 lower-case hex digits: f64 bit pattern of entry (0,0)>
//! <entry (1,0)>
//! ...
//! ```
//!
//! Entries are stored column-major, one per line, so a write/read round trip
//! is bit-exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

const MAGIC: &str = "DMAT1";

/// Serializes `m` to a `DMAT1` string.
pub fn to_dmat_string(m: &DenseMatrix) -> String {
    let mut out = String::with_capacity(24 + 17 * m.as_slice().len());
    let _ = writeln!(out, "{MAGIC} {} {}", m.rows(), m.cols());
    for &v in m.as_slice() {
        let _ = writeln!(out, "{:016x}", v.to_bits());
    }
    out
}

/// Parses a `DMAT1` document. `source_name` is used in error messages.
pub fn parse_dmat(text: &str, source_name: &str) -> Result<DenseMatrix> {
    let err = |line: usize, reason: String| Error::Parse {
        source_name: source_name.to_string(),
        line,
        reason,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| err(1, "empty input".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [magic, rows, cols] = fields[..] else {
        return Err(err(1, format!("expected `{MAGIC} <rows> <cols>`, got `{header}`")));
    };
    if magic != MAGIC {
        return Err(err(1, format!("unknown magic `{magic}`")));
    }
    let rows: usize = rows.parse().map_err(|_| err(1, format!("bad row count `{rows}`")))?;
    let cols: usize = cols.parse().map_err(|_| err(1, format!("bad column count `{cols}`")))?;
    let count = rows
        .checked_mul(cols)
        .ok_or_else(|| err(1, "dimensions overflow".into()))?;

    let mut data = Vec::with_capacity(count);
    for (k, line) in lines.enumerate() {
        let line_no = k + 2;
        let token = line.trim();
        if token.is_empty() {
            continue;
        }
        if data.len() == count {
            return Err(err(line_no, format!("more than {count} entries")));
        }
        if token.len() != 16 {
            return Err(err(line_no, format!("expected 16 hex digits, got `{token}`")));
        }
        let bits = u64::from_str_radix(token, 16).map_err(|_| err(line_no, format!("bad hex `{token}`")))?;
        data.push(f64::from_bits(bits));
    }
    if data.len() != count {
        return Err(err(text.lines().count(), format!("expected {count} entries, found {}", data.len())));
    }
    DenseMatrix::new(rows, cols, data)
}

pub fn write_dmat(path: impl AsRef<Path>, m: &DenseMatrix) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_dmat_string(m)).map_err(|e| Error::io(path, e))
}

pub fn read_dmat(path: impl AsRef<Path>) -> Result<DenseMatrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dmat(&text, &path.display().to_string())
}
