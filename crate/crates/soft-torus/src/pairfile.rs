//! Pair-file serialization and the theta-string grammar.
//!
//! A pair file is a JSON document with fields `n`, `theta`, `u`, `v`;
//! the matrices are row-major arrays of `[re, im]` pairs. Numbers are
//! written in shortest round-trip decimal form, so a save/load cycle is
//! bit-exact. Theta is either an exact rational `"p/q"` or a decimal,
//! which is snapped to a nearby rational (denominator at most 64) when
//! one exists within 1e-9.

use crate::error::{Error, Result};
use crate::generators::{Angle, UnitaryPair};
use crate::matcore::{CMatrix, C64};
use num_complex::Complex;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::Path;

pub const SNAP_MAX_DENOMINATOR: i64 = 64;
pub const SNAP_TOLERANCE: f64 = 1e-9;

#[derive(Serialize, Deserialize)]
struct PairDoc {
    n: usize,
    theta: String,
    u: Vec<Vec<[f64; 2]>>,
    v: Vec<Vec<[f64; 2]>>,
}

/// Result of parsing a theta string: the angle, and whether a decimal
/// input was snapped to a rational.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParsedTheta {
    pub angle: Angle,
    pub snapped: bool,
}

/// Parse `"p/q"` or a decimal. Decimals within [`SNAP_TOLERANCE`] of a
/// rational with denominator at most [`SNAP_MAX_DENOMINATOR`] become
/// that rational (`snapped = true`); other finite decimals stay real.
pub fn parse_theta(s: &str) -> Result<ParsedTheta> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::Parse("empty theta".into()));
    }
    if s.contains('/') {
        let r = s.parse()?;
        return Ok(ParsedTheta {
            angle: Angle::Rational(r),
            snapped: false,
        });
    }
    let x: f64 = s
        .parse()
        .map_err(|_| Error::Parse(format!("bad theta {s:?}")))?;
    if !x.is_finite() {
        return Err(Error::Parse(format!("non-finite theta {s:?}")));
    }
    match Angle::snap(x, SNAP_MAX_DENOMINATOR, SNAP_TOLERANCE) {
        Some(r) => Ok(ParsedTheta {
            angle: Angle::Rational(r),
            snapped: true,
        }),
        None => Ok(ParsedTheta {
            angle: Angle::Real(x),
            snapped: false,
        }),
    }
}

fn matrix_to_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    let n = m.n();
    (0..n)
        .map(|i| (0..n).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn rows_to_matrix(rows: &[Vec<[f64; 2]>], n: usize, name: &str) -> Result<CMatrix> {
    if rows.len() != n {
        return Err(Error::Dimension(format!(
            "{name} has {} rows, header says n={n}",
            rows.len()
        )));
    }
    let complex_rows: Vec<Vec<C64>> = rows
        .iter()
        .map(|row| row.iter().map(|&[re, im]| Complex::new(re, im)).collect())
        .collect();
    CMatrix::from_rows(&complex_rows)
}

/// Serialize a pair to the JSON document format.
pub fn to_json(pair: &UnitaryPair) -> String {
    let doc = PairDoc {
        n: pair.n(),
        theta: pair.theta().to_string(),
        u: matrix_to_rows(pair.u()),
        v: matrix_to_rows(pair.v()),
    };
    serde_json::to_string_pretty(&doc).expect("pair document serializes")
}

/// Parse and validate a pair document. The returned pair satisfies the
/// type invariants (square, finite, unitary within 1e-8).
pub fn from_json(s: &str) -> Result<UnitaryPair> {
    let doc: PairDoc =
        serde_json::from_str(s).map_err(|e| Error::Parse(format!("pair document: {e}")))?;
    let parsed = parse_theta(&doc.theta)?;
    let u = rows_to_matrix(&doc.u, doc.n, "u")?;
    let v = rows_to_matrix(&doc.v, doc.n, "v")?;
    UnitaryPair::new(u, v, parsed.angle)
}

/// Write a pair file atomically (temp file in the target directory,
/// then rename).
pub fn save(pair: &UnitaryPair, path: &Path) -> Result<()> {
    write_atomic(path, to_json(pair).as_bytes())
}

pub fn load(path: &Path) -> Result<UnitaryPair> {
    let text = std::fs::read_to_string(path)?;
    from_json(&text)
}

/// Atomic file write used for every output artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.to_string()))?;
    Ok(())
}
