//! Absorbing pipelines that build near perfect matchings: the S-absorbing
//! pipeline for `k >= 6` and the lattice-driven pipeline for general `k`.
//! Both certify their final matching from scratch against the hypergraph.

mod lattice_pipeline;
mod sabsorb;

pub use lattice_pipeline::{
    lattice_absorbing_family, lattice_absorbing_pipeline, LatticeFamily, LatticePipelineParams, LatticeTrace,
};
pub use sabsorb::{
    absorb_step, build_absorbing_matching, count_s_absorbing, find_s_absorbing_witness, npm_via_absorption,
    AbsorbTrace, AbsorbingFamily, AbsorbParams, SAbsorptionWitness,
};

use crate::bitset::VertexSet;
use crate::hgraph::{Hypergraph, Matching, MatchingError, SolverOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AbsorbError {
    #[error("S-absorption needs k >= 6, got k = {k}")]
    KTooSmall { k: usize },
    #[error("set has {got} vertices, expected {expected}")]
    BadSetSize { got: usize, expected: usize },
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("edge {edge:?} is not in the matching")]
    EdgeNotInMatching { edge: Vec<u32> },
    #[error("S contains covered vertex {vertex}")]
    SNotUncovered { vertex: u32 },
    #[error(transparent)]
    Matching(#[from] MatchingError),
}

/// Pipeline stage named in failure reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Precondition,
    Partition,
    Lattice,
    AbsorbingFamily,
    Reserve,
    CoverTrash,
    Residual,
    AbsorptionLoop,
    Certificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Error)]
#[error("pipeline failed at {stage:?}: {message}")]
pub struct PipelineFailure<T> {
    pub stage: Stage,
    pub message: String,
    pub trace: T,
}

/// Independent stream for `(seed, stage, iteration)`, so results never
/// depend on scheduling.
pub fn substream(seed: u64, stage: u64, iteration: u64) -> ChaCha8Rng {
    // splitmix64 finalizer over the mixed inputs
    let mut z = seed ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ iteration.wrapping_mul(0xD1B5_4A32_D192_ED69);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    ChaCha8Rng::seed_from_u64(z ^ (z >> 31))
}

/// Options for the residual matching step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidualMode {
    /// Exact solver up to `exact_limit` vertices, greedy plus swaps beyond.
    Auto,
    /// Leave the residual vertices uncovered; the absorption loop does all
    /// the work. Useful for exercising the loop.
    Skip,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualParams {
    pub mode: ResidualMode,
    pub exact_limit: usize,
    pub node_budget: u64,
    /// Improvement rounds allowed to the greedy local search.
    pub patience: usize,
}

impl Default for ResidualParams {
    fn default() -> Self {
        ResidualParams { mode: ResidualMode::Auto, exact_limit: 24, node_budget: 10_000_000, patience: 1000 }
    }
}

pub(crate) fn uncovered_mask(m: &Matching) -> VertexSet {
    let mut s = VertexSet::full(m.n());
    s.difference_with(m.covered());
    s
}

/// First edge of `h` (lex order) inside `pool`.
pub(crate) fn edge_inside(h: &Hypergraph, pool: &VertexSet) -> Option<Vec<u32>> {
    h.edge_sets().iter().position(|e| e.is_subset(pool)).map(|i| h.edge(i).to_vec())
}

/// Replaces one edge `f` of `m` (not in `protected`) by two disjoint edges
/// inside `f ∪ pool`, where `pool` is a set of uncovered vertices. Tries
/// edges in matching order; returns whether the matching grew.
pub(crate) fn swap_augment(h: &Hypergraph, m: &mut Matching, pool: &VertexSet, protected: &[Vec<u32>]) -> bool {
    let edges: Vec<Vec<u32>> = m.edges().to_vec();
    for f in edges {
        if protected.contains(&f) {
            continue;
        }
        let mut verts = pool.clone();
        for &v in &f {
            verts.insert(v);
        }
        let list = verts.to_vec();
        let sub = h.induced(&list);
        let report = sub.matching_number(&SolverOptions { target: Some(2), node_budget: 1_000_000 });
        if report.size >= 2 {
            m.remove(&f);
            for e in report.witness.edges() {
                let mapped: Vec<u32> = e.iter().map(|&i| list[i as usize]).collect();
                m.push(mapped).expect("edges lie in uncovered vertices plus f");
            }
            return true;
        }
    }
    false
}

/// A large matching of `h[verts]`: exact when small, otherwise greedy in
/// lex order followed by rounds of direct additions and 2-for-1 swaps.
/// Returned edges use the original labels.
pub(crate) fn residual_matching(h: &Hypergraph, verts: &[u32], params: &ResidualParams) -> Vec<Vec<u32>> {
    if params.mode == ResidualMode::Skip || verts.len() < h.k() {
        return Vec::new();
    }
    let sub = h.induced(verts);
    let local: Vec<Vec<u32>> = if verts.len() <= params.exact_limit {
        let report = sub.matching_number(&SolverOptions { target: None, node_budget: params.node_budget });
        report.witness.edges().to_vec()
    } else {
        let mut m = Matching::empty(sub.n(), sub.k());
        for e in sub.edges() {
            if e.iter().all(|&v| !m.covers(v)) {
                m.push(e.to_vec()).expect("checked disjoint");
            }
        }
        for _ in 0..params.patience {
            let pool = uncovered_mask(&m);
            if let Some(e) = edge_inside(&sub, &pool) {
                m.push(e).expect("inside uncovered set");
            } else if !swap_augment(&sub, &mut m, &pool, &[]) {
                break;
            }
        }
        m.edges().to_vec()
    };
    local.into_iter().map(|e| e.into_iter().map(|i| verts[i as usize]).collect()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hgraph::{generate, Model};

    #[test]
    fn substreams_differ_and_repeat() {
        use rand::Rng;
        let a: u64 = substream(1, 2, 3).gen();
        let b: u64 = substream(1, 2, 3).gen();
        let c: u64 = substream(1, 2, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn residual_modes() {
        let h = Hypergraph::complete(9, 3).unwrap();
        let verts: Vec<u32> = (0..9).collect();
        assert_eq!(residual_matching(&h, &verts, &ResidualParams::default()).len(), 3);
        let greedy = ResidualParams { exact_limit: 0, ..Default::default() };
        assert_eq!(residual_matching(&h, &verts, &greedy).len(), 3);
        let skip = ResidualParams { mode: ResidualMode::Skip, ..Default::default() };
        assert!(residual_matching(&h, &verts, &skip).is_empty());
    }

    #[test]
    fn local_search_beats_plain_greedy() {
        // greedy takes {0,1,2} and blocks the other three edges
        let h = Hypergraph::build(9, 3, &[vec![0, 1, 2], vec![0, 3, 4], vec![1, 5, 6], vec![2, 7, 8]]).unwrap();
        let verts: Vec<u32> = (0..9).collect();
        let greedy = ResidualParams { exact_limit: 0, ..Default::default() };
        assert_eq!(residual_matching(&h, &verts, &greedy).len(), 3);
        let h = generate(30, 3, Model::Random { p: 0.05, seed: 9 }).unwrap();
        let verts: Vec<u32> = (0..30).collect();
        let got = residual_matching(&h, &verts, &greedy);
        let m = Matching::new(30, 3, got).unwrap();
        m.certify(&h).unwrap();
    }
}
