//! k-uniform hypergraphs: canonical storage, degrees, generation, and the
//! exact set-packing solver used as ground truth by every other module.

mod io;
mod matching;
mod solver;

pub use io::{read_hg, write_hg, HgParseError};
pub use matching::{Matching, MatchingError};
pub use solver::{MatchingReport, SearchStatus, SolverOptions, DEFAULT_NODE_BUDGET};

use crate::bitset::VertexSet;
use crate::combin::{binomial, for_each_combination, for_each_subset_of, next_combination, RankTable};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypergraphError {
    #[error("uniformity k = {k} must be at least 2")]
    BadUniformity { k: usize },
    #[error("vertex count n = {n} is smaller than k = {k}")]
    TooFewVertices { n: usize, k: usize },
    #[error("edge {index} has {got} distinct vertices, expected {k}")]
    NonUniformEdge { index: usize, got: usize, k: usize },
    #[error("edge {index} uses vertex {vertex} outside 0..{n}")]
    VertexOutOfRange { index: usize, vertex: u32, n: usize },
    #[error("edge {index} duplicates {edge:?}")]
    DuplicateEdge { index: usize, edge: Vec<u32> },
    #[error("set size {got} outside the allowed range {min}..={max}")]
    BadSetSize { got: usize, min: usize, max: usize },
    #[error("enumeration of C({n}, {d}) sets exceeds the exhaustive limit")]
    TooLarge { n: usize, d: usize },
}

/// A k-uniform hypergraph on vertices `0..n`. Edges are kept sorted within
/// themselves and lexicographically across, without duplicates.
#[derive(Clone, PartialEq, Eq)]
pub struct Hypergraph {
    n: usize,
    k: usize,
    // edge i occupies verts[i*k .. (i+1)*k]
    verts: Vec<u32>,
    masks: Vec<VertexSet>,
}

impl std::fmt::Debug for Hypergraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Hypergraph")
            .field("n", &self.n)
            .field("k", &self.k)
            .field("edges", &self.edge_count())
            .finish()
    }
}

/// Instance generators for [`generate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Model {
    Complete,
    Random { p: f64, seed: u64 },
}

/// Minimum d-degree together with a d-set attaining it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DegreeProfile {
    pub d: usize,
    pub value: u64,
    pub witness: Vec<u32>,
}

/// Largest `C(n, d)` that `min_degree` will enumerate.
pub const EXHAUSTIVE_SET_LIMIT: u64 = 1 << 27;

fn check_params(n: usize, k: usize) -> Result<(), HypergraphError> {
    if k < 2 {
        return Err(HypergraphError::BadUniformity { k });
    }
    if n < k {
        return Err(HypergraphError::TooFewVertices { n, k });
    }
    Ok(())
}

impl Hypergraph {
    /// Validates and canonicalizes an edge list. Duplicates are an error.
    pub fn build<E: AsRef<[u32]>>(n: usize, k: usize, edges: &[E]) -> Result<Self, HypergraphError> {
        check_params(n, k)?;
        let mut sorted: Vec<Vec<u32>> = Vec::with_capacity(edges.len());
        for (index, e) in edges.iter().enumerate() {
            let mut e = e.as_ref().to_vec();
            if let Some(&vertex) = e.iter().find(|&&v| v as usize >= n) {
                return Err(HypergraphError::VertexOutOfRange { index, vertex, n });
            }
            e.sort_unstable();
            e.dedup();
            if e.len() != k {
                return Err(HypergraphError::NonUniformEdge { index, got: e.len(), k });
            }
            sorted.push(e);
        }
        let mut order: Vec<usize> = (0..sorted.len()).collect();
        order.sort_by(|&a, &b| sorted[a].cmp(&sorted[b]).then(a.cmp(&b)));
        for w in order.windows(2) {
            if sorted[w[0]] == sorted[w[1]] {
                let index = w[0].max(w[1]);
                return Err(HypergraphError::DuplicateEdge { index, edge: sorted[index].clone() });
            }
        }
        let mut h = Hypergraph::empty_unchecked(n, k);
        for i in order {
            h.push_sorted(&sorted[i]);
        }
        Ok(h)
    }

    /// Builds from edges already known to be sorted, distinct and in
    /// canonical order. Used by generators that enumerate in lex order.
    pub(crate) fn from_canonical_iter<I: IntoIterator<Item = Vec<u32>>>(n: usize, k: usize, edges: I) -> Self {
        let mut h = Hypergraph::empty_unchecked(n, k);
        for e in edges {
            h.push_sorted(&e);
        }
        debug_assert!(h.is_canonical());
        h
    }

    fn empty_unchecked(n: usize, k: usize) -> Self {
        Hypergraph { n, k, verts: Vec::new(), masks: Vec::new() }
    }

    fn push_sorted(&mut self, e: &[u32]) {
        self.verts.extend_from_slice(e);
        self.masks.push(VertexSet::from_vertices(self.n, e));
    }

    fn is_canonical(&self) -> bool {
        (1..self.edge_count()).all(|i| self.edge(i - 1) < self.edge(i))
            && self.edges().all(|e| e.windows(2).all(|w| w[0] < w[1]))
    }

    pub fn empty(n: usize, k: usize) -> Result<Self, HypergraphError> {
        check_params(n, k)?;
        Ok(Hypergraph::empty_unchecked(n, k))
    }

    pub fn complete(n: usize, k: usize) -> Result<Self, HypergraphError> {
        generate(n, k, Model::Complete)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn edge_count(&self) -> usize {
        self.masks.len()
    }

    /// Sorted vertices of edge `i`.
    pub fn edge(&self, i: usize) -> &[u32] {
        &self.verts[i * self.k..(i + 1) * self.k]
    }

    pub fn edge_set(&self, i: usize) -> &VertexSet {
        &self.masks[i]
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.verts.chunks_exact(self.k)
    }

    pub fn edge_sets(&self) -> &[VertexSet] {
        &self.masks
    }

    /// Membership of a k-set given as sorted vertices.
    pub fn contains_edge(&self, sorted: &[u32]) -> bool {
        self.edge_index(sorted).is_some()
    }

    /// Index of the edge with these sorted vertices, if present.
    pub fn edge_index(&self, sorted: &[u32]) -> Option<usize> {
        if sorted.len() != self.k {
            return None;
        }
        let (mut lo, mut hi) = (0, self.edge_count());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.edge(mid).cmp(sorted) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Copy with one more edge; `Ok(self)` unchanged if already present.
    pub fn with_edge(&self, edge: &[u32]) -> Result<Self, HypergraphError> {
        let mut all: Vec<Vec<u32>> = self.edges().map(<[u32]>::to_vec).collect();
        let mut e = edge.to_vec();
        e.sort_unstable();
        if self.contains_edge(&e) {
            return Ok(self.clone());
        }
        all.push(e);
        Hypergraph::build(self.n, self.k, &all)
    }

    /// Number of edges containing `set`.
    pub fn degree(&self, set: &[u32]) -> Result<u64, HypergraphError> {
        let mut s = set.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() || s.len() >= self.k {
            return Err(HypergraphError::BadSetSize { got: s.len(), min: 1, max: self.k - 1 });
        }
        if let Some(&vertex) = s.iter().find(|&&v| v as usize >= self.n) {
            return Err(HypergraphError::VertexOutOfRange { index: 0, vertex, n: self.n });
        }
        let mask = VertexSet::from_vertices(self.n, &s);
        Ok(self.masks.iter().filter(|e| mask.is_subset(e)).count() as u64)
    }

    /// Degrees of all d-sets, indexed by colex rank.
    pub fn degree_table(&self, d: usize) -> Result<Vec<u64>, HypergraphError> {
        if d == 0 || d >= self.k {
            return Err(HypergraphError::BadSetSize { got: d, min: 1, max: self.k - 1 });
        }
        let total = binomial(self.n as u64, d as u64).filter(|&c| c <= EXHAUSTIVE_SET_LIMIT);
        let total = total.ok_or(HypergraphError::TooLarge { n: self.n, d })?;
        let table = RankTable::new(self.n, d);
        let mut counts = vec![0u64; total as usize];
        for e in self.edges() {
            for_each_subset_of(e, d, |s| counts[table.rank(s) as usize] += 1);
        }
        Ok(counts)
    }

    /// Exhaustive minimum d-degree; the witness is the lexicographically
    /// first d-set attaining it.
    pub fn min_degree(&self, d: usize) -> Result<DegreeProfile, HypergraphError> {
        let counts = self.degree_table(d)?;
        let table = RankTable::new(self.n, d);
        let mut best: Option<(u64, Vec<u32>)> = None;
        for_each_combination(self.n, d, |s| {
            let c = counts[table.rank(s) as usize];
            if best.as_ref().is_none_or(|(b, _)| c < *b) {
                best = Some((c, s.to_vec()));
            }
        });
        let (value, witness) = best.expect("n >= k > d guarantees at least one d-set");
        Ok(DegreeProfile { d, value, witness })
    }

    /// Induced subgraph on `keep` (sorted, distinct), relabeled to
    /// `0..keep.len()` in order.
    pub fn induced(&self, keep: &[u32]) -> Hypergraph {
        let mut relabel = vec![u32::MAX; self.n];
        for (i, &v) in keep.iter().enumerate() {
            relabel[v as usize] = i as u32;
        }
        let edges = self.edges().filter_map(|e| {
            let mapped: Vec<u32> = e.iter().map(|&v| relabel[v as usize]).collect();
            mapped.iter().all(|&v| v != u32::MAX).then_some(mapped)
        });
        // relabeling is monotone, so lex order survives
        let n = keep.len().max(self.k);
        Hypergraph::from_canonical_iter(n, self.k, edges)
    }

    /// A perfect matching of the induced subgraph on the sorted vertex list
    /// `verts`, found by looking up candidate k-subsets directly. Meant for
    /// small `verts`; returns edges as sorted vertex lists.
    pub fn perfect_matching_within(&self, verts: &[u32]) -> Option<Vec<Vec<u32>>> {
        if verts.len() % self.k != 0 {
            return None;
        }
        let mut out = Vec::with_capacity(verts.len() / self.k);
        self.pm_within_rec(verts.to_vec(), &mut out).then_some(out)
    }

    fn pm_within_rec(&self, rest: Vec<u32>, out: &mut Vec<Vec<u32>>) -> bool {
        let Some((&first, tail)) = rest.split_first() else {
            return true;
        };
        let mut found = false;
        for_each_subset_of(tail, self.k - 1, |others| {
            if found {
                return;
            }
            let mut e = Vec::with_capacity(self.k);
            e.push(first);
            e.extend_from_slice(others);
            if self.contains_edge(&e) {
                let remaining: Vec<u32> = tail.iter().copied().filter(|v| !others.contains(v)).collect();
                out.push(e);
                if self.pm_within_rec(remaining, out) {
                    found = true;
                } else {
                    out.pop();
                }
            }
        });
        found
    }

    /// Exact maximum matching (or decision at `opts.target`).
    pub fn matching_number(&self, opts: &SolverOptions) -> MatchingReport {
        solver::solve(self, opts)
    }
}

/// Complete or Bernoulli-random k-graphs. The random model draws one
/// uniform per k-set in lexicographic order from a ChaCha8 stream, so the
/// output depends only on `(n, k, p, seed)`.
pub fn generate(n: usize, k: usize, model: Model) -> Result<Hypergraph, HypergraphError> {
    check_params(n, k)?;
    let mut h = Hypergraph::empty_unchecked(n, k);
    let mut comb: Vec<u32> = (0..k as u32).collect();
    let mut rng = match model {
        Model::Random { seed, .. } => Some(ChaCha8Rng::seed_from_u64(seed)),
        Model::Complete => None,
    };
    let p = match model {
        Model::Random { p, .. } => p.clamp(0.0, 1.0),
        Model::Complete => 1.0,
    };
    loop {
        let keep = match rng.as_mut() {
            Some(rng) => rng.gen::<f64>() < p,
            None => true,
        };
        if keep {
            h.push_sorted(&comb);
        }
        if !next_combination(&mut comb, n as u32) {
            break;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn build_canonicalizes() {
        let h = Hypergraph::build(5, 3, &[vec![4, 3, 2], vec![2, 1, 0]]).unwrap();
        assert_eq!(h.edge_count(), 2);
        assert_eq!(h.edge(0), &[0, 1, 2]);
        assert_eq!(h.edge(1), &[2, 3, 4]);
    }

    #[test]
    fn build_errors_are_distinct() {
        let dup = Hypergraph::build(5, 3, &[vec![0, 1, 2], vec![0, 2, 1]]);
        assert!(matches!(dup, Err(HypergraphError::DuplicateEdge { .. })));
        let range = Hypergraph::build(4, 3, &[vec![0, 1, 5]]);
        assert!(matches!(range, Err(HypergraphError::VertexOutOfRange { vertex: 5, .. })));
        let uniform = Hypergraph::build(5, 3, &[vec![0, 1, 1]]);
        assert!(matches!(uniform, Err(HypergraphError::NonUniformEdge { got: 2, .. })));
        let short = Hypergraph::build(5, 3, &[vec![0, 1]]);
        assert!(matches!(short, Err(HypergraphError::NonUniformEdge { got: 2, .. })));
        assert!(matches!(Hypergraph::empty(5, 1), Err(HypergraphError::BadUniformity { .. })));
        assert!(matches!(Hypergraph::empty(2, 3), Err(HypergraphError::TooFewVertices { .. })));
    }

    #[test]
    fn degrees_of_complete_graphs() {
        let h = Hypergraph::complete(5, 3).unwrap();
        assert_eq!(h.edge_count(), 10);
        assert_eq!(h.degree(&[0]).unwrap(), 6);
        let h = Hypergraph::complete(8, 4).unwrap();
        assert_eq!(h.degree(&[1, 2, 7]).unwrap(), 5);
        assert_eq!(h.min_degree(3).unwrap().value, 5);
        assert!(h.degree(&[1, 2, 3, 4]).is_err());
        assert!(h.degree(&[]).is_err());
        assert!(h.min_degree(4).is_err());
    }

    #[test]
    fn min_degree_witness_is_lex_first() {
        // vertex 3 is isolated
        let h = Hypergraph::build(4, 2, &[vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let p = h.min_degree(1).unwrap();
        assert_eq!(p.value, 0);
        assert_eq!(p.witness, vec![3]);
    }

    #[test]
    fn random_generation_is_reproducible() {
        let a = generate(20, 6, Model::Random { p: 0.5, seed: 7 }).unwrap();
        let b = generate(20, 6, Model::Random { p: 0.5, seed: 7 }).unwrap();
        assert_eq!(a, b);
        let c = generate(20, 6, Model::Random { p: 0.5, seed: 8 }).unwrap();
        assert_ne!(a, c);
        assert_eq!(generate(20, 6, Model::Random { p: 0.0, seed: 1 }).unwrap().edge_count(), 0);
        assert_eq!(generate(9, 4, Model::Random { p: 1.0, seed: 1 }).unwrap().edge_count(), 126);
    }

    #[test]
    fn perfect_matching_within_small_sets() {
        let h = Hypergraph::complete(6, 3).unwrap();
        let pm = h.perfect_matching_within(&[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(pm.len(), 2);
        let sparse = Hypergraph::build(6, 3, &[vec![0, 1, 2], vec![0, 3, 4]]).unwrap();
        assert!(sparse.perfect_matching_within(&[0, 1, 2, 3, 4, 5]).is_none());
        assert_eq!(sparse.perfect_matching_within(&[0, 1, 2]).unwrap(), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn induced_relabels() {
        let h = Hypergraph::build(6, 3, &[vec![0, 1, 2], vec![3, 4, 5], vec![1, 3, 5]]).unwrap();
        let sub = h.induced(&[1, 3, 5]);
        assert_eq!(sub.edge_count(), 1);
        assert_eq!(sub.edge(0), &[0, 1, 2]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn degree_sum_identity(n in 4usize..=9, k in 2usize..=4, p in 0.0f64..1.0, seed: u64) {
            let h = generate(n, k, Model::Random { p, seed }).unwrap();
            for d in 1..k {
                let total: u64 = h.degree_table(d).unwrap().iter().sum();
                let per_edge = crate::combin::binomial(k as u64, d as u64).unwrap();
                proptest::prop_assert_eq!(total, h.edge_count() as u64 * per_edge);
            }
        }

        #[test]
        fn adding_an_edge_never_lowers_degrees(n in 5usize..=9, p in 0.0f64..0.8, seed: u64, pick in 0usize..1000) {
            let h = generate(n, 3, Model::Random { p, seed }).unwrap();
            let c = Hypergraph::complete(n, 3).unwrap();
            let extra = c.edge(pick % c.edge_count()).to_vec();
            let g = h.with_edge(&extra).unwrap();
            for d in 1..3 {
                let before = h.degree_table(d).unwrap();
                let after = g.degree_table(d).unwrap();
                proptest::prop_assert!(before.iter().zip(&after).all(|(a, b)| a <= b));
                proptest::prop_assert!(h.min_degree(d).unwrap().value <= g.min_degree(d).unwrap().value);
            }
            let opts = SolverOptions::default();
            proptest::prop_assert!(h.matching_number(&opts).size <= g.matching_number(&opts).size);
        }
    }
}
