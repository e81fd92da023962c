//! Parameter sweeps over `(k, d, l)` emitted as CSV. Cells are computed in
//! parallel and written in parameter order.

use crate::thresholds::{conjectured_threshold, g_optimize, Governing, ThresholdError};
use rayon::prelude::*;
use serde::Serialize;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// `g`, `x*`, `j*` per cell.
    G,
    /// `g`, the space term, their maximum, and which one governs.
    Conjecture,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SweepError {
    #[error("bad range {0:?}; expected a, a..b, or a..=b")]
    BadRange(String),
    #[error("unknown sweep {0:?}; expected g or conjecture")]
    UnknownKind(String),
    #[error(transparent)]
    Threshold(#[from] ThresholdError),
}

impl FromStr for SweepKind {
    type Err = SweepError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "g" => Ok(SweepKind::G),
            "conjecture" => Ok(SweepKind::Conjecture),
            other => Err(SweepError::UnknownKind(other.to_string())),
        }
    }
}

/// Parses `a`, `a..b`, or `a..=b`; both dotted forms include `b`. A range
/// with `b < a` is empty.
pub fn parse_range(s: &str) -> Result<RangeInclusive<usize>, SweepError> {
    let bad = || SweepError::BadRange(s.to_string());
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once("..") {
        None => {
            let a = num(s)?;
            Ok(a..=a)
        }
        Some((a, b)) => Ok(num(a)?..=num(b.strip_prefix('=').unwrap_or(b))?),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepRanges {
    pub k: RangeInclusive<usize>,
    /// `None` means every `1 <= d <= k-1`.
    pub d: Option<RangeInclusive<usize>>,
    /// `None` means every `1 <= l <= k-1`.
    pub ell: Option<RangeInclusive<usize>>,
}

impl SweepRanges {
    /// Valid `(k, d, l)` cells in lexicographic order.
    pub fn cells(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for k in self.k.clone().filter(|&k| k >= 2) {
            let ds = self.d.clone().unwrap_or(1..=k - 1);
            for d in ds.filter(|&d| d >= 1 && d < k) {
                let ells = self.ell.clone().unwrap_or(1..=k - 1);
                for ell in ells.filter(|&ell| ell < k) {
                    out.push((k, d, ell));
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub k: usize,
    pub d: usize,
    pub ell: usize,
    pub g: f64,
    pub x_star: f64,
    pub j_star: usize,
    pub space_term: Option<f64>,
    pub conjectured: Option<f64>,
    pub governing: Option<Governing>,
}

pub fn sweep_rows(kind: SweepKind, ranges: &SweepRanges) -> Result<Vec<SweepRow>, SweepError> {
    ranges
        .cells()
        .into_par_iter()
        .map(|(k, d, ell)| {
            let t = g_optimize(k, d, ell)?;
            let mut row = SweepRow {
                k,
                d,
                ell,
                g: t.g,
                x_star: t.x_star,
                j_star: t.j_star,
                space_term: None,
                conjectured: None,
                governing: None,
            };
            if kind == SweepKind::Conjecture {
                let c = conjectured_threshold(k, d, ell)?;
                row.space_term = Some(c.space_term);
                row.conjectured = Some(c.value);
                row.governing = Some(c.governing);
            }
            Ok(row)
        })
        .collect()
}

pub fn csv_header(kind: SweepKind) -> &'static str {
    match kind {
        SweepKind::G => "k,d,ell,g,x_star,j_star",
        SweepKind::Conjecture => "k,d,ell,g,space_term,conjectured,governing",
    }
}

pub fn rows_to_csv(kind: SweepKind, rows: &[SweepRow]) -> String {
    let mut out = String::from(csv_header(kind));
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},{},{}", r.k, r.d, r.ell, r.g);
        match kind {
            SweepKind::G => {
                let _ = write!(out, ",{},{}", r.x_star, r.j_star);
            }
            SweepKind::Conjecture => {
                let gov = match r.governing {
                    Some(Governing::Divisibility) => "divisibility",
                    Some(Governing::Space) => "space",
                    None => "",
                };
                let _ = write!(out, ",{},{},{gov}", r.space_term.unwrap_or(f64::NAN), r.conjectured.unwrap_or(f64::NAN));
            }
        }
        out.push('\n');
    }
    out
}

/// The full CSV for a sweep.
pub fn sweep_csv(kind: SweepKind, ranges: &SweepRanges) -> Result<String, SweepError> {
    Ok(rows_to_csv(kind, &sweep_rows(kind, ranges)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_parse() {
        assert_eq!(parse_range("4..10").unwrap(), 4..=10);
        assert_eq!(parse_range("4..=10").unwrap(), 4..=10);
        assert_eq!(parse_range("3").unwrap(), 3..=3);
        assert!(parse_range("a..3").is_err());
        assert!(parse_range("").is_err());
    }

    #[test]
    fn g_sweep_has_anchor_row() {
        let ranges = SweepRanges { k: 4..=7, d: None, ell: Some(1..=1) };
        let csv = sweep_csv(SweepKind::G, &ranges).unwrap();
        let row = csv.lines().find(|l| l.starts_with("6,3,1,")).unwrap();
        let g: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!((g - 0.2831).abs() < 1e-3);
        assert_eq!(csv.lines().count(), 1 + ranges.cells().len());
    }

    #[test]
    fn conjecture_sweep_hits_five_ninths() {
        let ranges = SweepRanges { k: 3..=3, d: Some(1..=1), ell: Some(1..=1) };
        let csv = sweep_csv(SweepKind::Conjecture, &ranges).unwrap();
        let row = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        let c: f64 = fields[5].parse().unwrap();
        assert!((c - 5.0 / 9.0).abs() < 1e-12);
        assert_eq!(fields[6], "space");
    }

    #[test]
    fn empty_range_is_header_only() {
        let ranges = SweepRanges { k: 5..=4, d: None, ell: None };
        assert_eq!(sweep_csv(SweepKind::G, &ranges).unwrap(), "k,d,ell,g,x_star,j_star\n");
        let ranges = SweepRanges { k: 3..=5, d: Some(9..=9), ell: None };
        assert_eq!(sweep_csv(SweepKind::Conjecture, &ranges).unwrap().lines().count(), 1);
    }
}
