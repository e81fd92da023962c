use super::Hypergraph;
use crate::bitset::VertexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatchingError {
    #[error("edge {edge:?} does not have {k} distinct vertices in range")]
    MalformedEdge { edge: Vec<u32>, k: usize },
    #[error("edges {a:?} and {b:?} share a vertex")]
    Overlap { a: Vec<u32>, b: Vec<u32> },
    #[error("{edge:?} is not an edge of the hypergraph")]
    NotAnEdge { edge: Vec<u32> },
    #[error("matching of size {size} exceeds floor(n/k) = {max}")]
    Oversized { size: usize, max: usize },
}

/// Pairwise disjoint edges over a universe of `n` vertices. Edges are kept
/// sorted, so two matchings with the same edges compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    n: usize,
    k: usize,
    edges: Vec<Vec<u32>>,
    #[serde(skip)]
    covered: VertexSet,
}

impl Matching {
    pub fn empty(n: usize, k: usize) -> Self {
        Matching { n, k, edges: Vec::new(), covered: VertexSet::with_universe(n) }
    }

    /// Checks shape and disjointness; does not check membership in any
    /// hypergraph (see [`Matching::certify`]).
    pub fn new(n: usize, k: usize, edges: Vec<Vec<u32>>) -> Result<Self, MatchingError> {
        let mut m = Matching::empty(n, k);
        for e in edges {
            m.push(e)?;
        }
        Ok(m)
    }

    pub fn push(&mut self, mut edge: Vec<u32>) -> Result<(), MatchingError> {
        edge.sort_unstable();
        let distinct = edge.windows(2).all(|w| w[0] < w[1]);
        if edge.len() != self.k || !distinct || edge.iter().any(|&v| v as usize >= self.n) {
            return Err(MatchingError::MalformedEdge { edge, k: self.k });
        }
        if let Some(&v) = edge.iter().find(|&&v| self.covered.contains(v)) {
            let a = self.edges.iter().find(|e| e.contains(&v)).cloned().unwrap_or_default();
            return Err(MatchingError::Overlap { a, b: edge });
        }
        for &v in &edge {
            self.covered.insert(v);
        }
        let at = self.edges.partition_point(|e| *e < edge);
        self.edges.insert(at, edge);
        Ok(())
    }

    /// Removes `edge` (sorted) if present.
    pub fn remove(&mut self, edge: &[u32]) -> bool {
        match self.edges.iter().position(|e| e == edge) {
            Some(i) => {
                for &v in &self.edges[i] {
                    self.covered.remove(v);
                }
                self.edges.remove(i);
                true
            }
            None => false,
        }
    }

    pub fn edges(&self) -> &[Vec<u32>] {
        &self.edges
    }

    pub fn size(&self) -> usize {
        self.edges.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn covered(&self) -> &VertexSet {
        &self.covered
    }

    pub fn covers(&self, v: u32) -> bool {
        self.covered.contains(v)
    }

    pub fn uncovered(&self) -> Vec<u32> {
        (0..self.n as u32).filter(|&v| !self.covered.contains(v)).collect()
    }

    pub fn is_perfect(&self) -> bool {
        self.covered.len() == self.n
    }

    pub fn is_near_perfect(&self) -> bool {
        self.size() == self.n / self.k
    }

    /// Re-verifies every invariant from scratch against `h`: all edges
    /// belong to `h`, they are disjoint, `|covered| = k * size`, and the
    /// size does not exceed `floor(n/k)`.
    pub fn certify(&self, h: &Hypergraph) -> Result<(), MatchingError> {
        let mut seen = VertexSet::with_universe(self.n);
        for e in &self.edges {
            if !h.contains_edge(e) {
                return Err(MatchingError::NotAnEdge { edge: e.clone() });
            }
            let mask = VertexSet::from_vertices(self.n, e);
            if !seen.is_disjoint(&mask) {
                return Err(MatchingError::Overlap { a: Vec::new(), b: e.clone() });
            }
            seen.union_with(&mask);
        }
        if seen.len() != self.k * self.size() || seen != self.covered {
            return Err(MatchingError::Overlap { a: Vec::new(), b: Vec::new() });
        }
        if self.size() > self.n / self.k {
            return Err(MatchingError::Oversized { size: self.size(), max: self.n / self.k });
        }
        Ok(())
    }

    /// Rebuilds the covered set after deserialization.
    pub fn rehydrate(self) -> Result<Self, MatchingError> {
        Matching::new(self.n, self.k, self.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_overlap_and_tracks_cover() {
        let mut m = Matching::empty(7, 3);
        m.push(vec![2, 1, 0]).unwrap();
        assert!(matches!(m.push(vec![2, 3, 4]), Err(MatchingError::Overlap { .. })));
        m.push(vec![3, 4, 5]).unwrap();
        assert_eq!(m.covered().len(), 6);
        assert_eq!(m.uncovered(), vec![6]);
        assert!(m.is_near_perfect());
        assert!(m.remove(&[0, 1, 2]));
        assert_eq!(m.covered().len(), 3);
        assert!(!m.remove(&[0, 1, 2]));
    }

    #[test]
    fn certify_checks_membership() {
        let h = Hypergraph::build(6, 3, &[vec![0, 1, 2]]).unwrap();
        let good = Matching::new(6, 3, vec![vec![0, 1, 2]]).unwrap();
        assert!(good.certify(&h).is_ok());
        let bad = Matching::new(6, 3, vec![vec![3, 4, 5]]).unwrap();
        assert!(matches!(bad.certify(&h), Err(MatchingError::NotAnEdge { .. })));
    }
}
