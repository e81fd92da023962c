//! The `.hg` text format: first non-comment line is `k n`, then one edge
//! per line as `k` whitespace-separated 0-based vertex ids. `#` starts a
//! comment that runs to the end of the line.

use super::{Hypergraph, HypergraphError};
use std::io::{self, BufRead, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HgParseError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Invalid { line: usize, source: HypergraphError },
    #[error("missing `k n` header")]
    MissingHeader,
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_numbers(body: &str, line: usize) -> Result<Vec<u64>, HgParseError> {
    body.split_whitespace()
        .map(|tok| {
            tok.parse::<u64>().map_err(|_| HgParseError::Syntax { line, msg: format!("`{tok}` is not a non-negative integer") })
        })
        .collect()
}

pub fn read_hg<R: BufRead>(reader: R) -> Result<Hypergraph, HgParseError> {
    let mut header: Option<(usize, usize)> = None;
    let mut edges: Vec<Vec<u32>> = Vec::new();
    let mut lines_of_edges: Vec<usize> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let nums = parse_numbers(body, line_no)?;
        match header {
            None => {
                let [k, n] = nums[..] else {
                    return Err(HgParseError::Syntax { line: line_no, msg: "header must be `k n`".into() });
                };
                let (k, n) = (k as usize, n as usize);
                Hypergraph::empty(n, k).map_err(|source| HgParseError::Invalid { line: line_no, source })?;
                header = Some((k, n));
            }
            Some((k, n)) => {
                if nums.len() != k {
                    return Err(HgParseError::Syntax { line: line_no, msg: format!("expected {k} vertices, found {}", nums.len()) });
                }
                if let Some(&v) = nums.iter().find(|&&v| v >= n as u64) {
                    return Err(HgParseError::Syntax { line: line_no, msg: format!("vertex {v} outside 0..{n}") });
                }
                edges.push(nums.into_iter().map(|v| v as u32).collect());
                lines_of_edges.push(line_no);
            }
        }
    }
    let (k, n) = header.ok_or(HgParseError::MissingHeader)?;
    Hypergraph::build(n, k, &edges).map_err(|source| {
        let index = match &source {
            HypergraphError::NonUniformEdge { index, .. }
            | HypergraphError::VertexOutOfRange { index, .. }
            | HypergraphError::DuplicateEdge { index, .. } => *index,
            _ => 0,
        };
        HgParseError::Invalid { line: lines_of_edges.get(index).copied().unwrap_or(0), source }
    })
}

/// Writes canonical order; the output of [`read_hg`] round-trips exactly.
pub fn write_hg<W: Write>(h: &Hypergraph, mut w: W) -> io::Result<()> {
    writeln!(w, "{} {}", h.k(), h.n())?;
    for e in h.edges() {
        let line: Vec<String> = e.iter().map(u32::to_string).collect();
        writeln!(w, "{}", line.join(" "))?;
    }
    Ok(())
}
