//! Reachability counts, the weak-edge trash set, partitions into
//! 1-reachability components, and merging parts along transferrals.
//!
//! Vertices `u, v` are reachable at order `i` through an `(ik-1)`-set `S`
//! avoiding both when `H[S ∪ {u}]` and `H[S ∪ {v}]` have perfect matchings.

use crate::combin::{binomial, binomial_f64, for_each_subset_of};
use crate::hgraph::{Hypergraph, HypergraphError};
use crate::lattice::{robust_vectors, IntegerLattice, VertexPartition};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReachError {
    #[error("sampling budget must be at least 1")]
    ZeroSamples,
    #[error("threshold `{name}` must be at least 1")]
    ZeroThreshold { name: &'static str },
    #[error("vertices must be distinct and below n = {n}, got {u} and {v}")]
    BadPair { u: u32, v: u32, n: usize },
    #[error("order i = {i} must be at least 1")]
    BadOrder { i: usize },
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
}

/// Finite renderings of the reachability constants; all are absolute counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReachParams {
    /// Minimum order-1 count for two vertices to be linked.
    pub tau1: u64,
    /// A (k-1)-set of degree at most this is weak; also the size floor for
    /// parts and for reach degrees.
    pub eps_weak: u64,
    /// Vertices in at least this many weak edges go to the trash.
    pub eps_incidence: u64,
    /// Highest order used by closedness spot checks.
    pub i_max: usize,
    /// Monte Carlo samples for counts too large to enumerate.
    pub samples: u64,
    pub seed: u64,
}

impl Default for ReachParams {
    fn default() -> Self {
        ReachParams { tau1: 1, eps_weak: 1, eps_incidence: 1, i_max: 2, samples: 2000, seed: 0 }
    }
}

impl ReachParams {
    pub fn validate(&self) -> Result<(), ReachError> {
        for (name, v) in [("tau1", self.tau1), ("eps_weak", self.eps_weak), ("eps_incidence", self.eps_incidence)] {
            if v == 0 {
                return Err(ReachError::ZeroThreshold { name });
            }
        }
        if self.samples == 0 {
            return Err(ReachError::ZeroSamples);
        }
        if self.i_max == 0 {
            return Err(ReachError::BadOrder { i: 0 });
        }
        Ok(())
    }
}

/// Largest number of `(ik-1)`-sets enumerated exactly.
pub const EXACT_REACH_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReachCount {
    /// Exact count, or the Monte Carlo estimate.
    pub value: f64,
    pub exact: bool,
    /// Standard error of `value`; zero when exact.
    pub std_error: f64,
}

impl ReachCount {
    fn exact(c: u64) -> Self {
        ReachCount { value: c as f64, exact: true, std_error: 0.0 }
    }
}

fn check_pair(h: &Hypergraph, u: u32, v: u32) -> Result<(), ReachError> {
    if u == v || u as usize >= h.n() || v as usize >= h.n() {
        return Err(ReachError::BadPair { u, v, n: h.n() });
    }
    Ok(())
}

/// Number of (k-1)-sets `S` with `S ∪ {u}` and `S ∪ {v}` both edges.
pub fn reach_count_1(h: &Hypergraph, u: u32, v: u32) -> u64 {
    let mut count = 0;
    let mut other = Vec::with_capacity(h.k());
    for e in h.edges() {
        if !e.contains(&u) || e.contains(&v) {
            continue;
        }
        other.clear();
        other.extend(e.iter().copied().filter(|&x| x != u));
        let at = other.partition_point(|&x| x < v);
        other.insert(at, v);
        if h.contains_edge(&other) {
            count += 1;
        }
    }
    count
}

fn qualifies(h: &Hypergraph, s: &[u32], u: u32, v: u32) -> bool {
    let with = |x: u32| {
        let mut t = s.to_vec();
        let at = t.partition_point(|&y| y < x);
        t.insert(at, x);
        t
    };
    h.perfect_matching_within(&with(u)).is_some() && h.perfect_matching_within(&with(v)).is_some()
}

/// Order-`i` reach count: exact for `i = 1` or when at most
/// [`EXACT_REACH_LIMIT`] sets exist, otherwise a Monte Carlo estimate from
/// `params.samples` uniform sets drawn with a stream seeded by
/// `(params.seed, u, v, i)`.
pub fn reach_count(h: &Hypergraph, u: u32, v: u32, i: usize, params: &ReachParams) -> Result<ReachCount, ReachError> {
    check_pair(h, u, v)?;
    if i == 0 {
        return Err(ReachError::BadOrder { i });
    }
    if i == 1 {
        return Ok(ReachCount::exact(reach_count_1(h, u, v)));
    }
    if params.samples == 0 {
        return Err(ReachError::ZeroSamples);
    }
    let size = i * h.k() - 1;
    let rest: Vec<u32> = (0..h.n() as u32).filter(|&x| x != u && x != v).collect();
    if size > rest.len() {
        return Ok(ReachCount::exact(0));
    }
    match binomial(rest.len() as u64, size as u64) {
        Some(total) if total <= EXACT_REACH_LIMIT => {
            // split by first element so the enumeration parallelizes
            let count: u64 = (0..rest.len())
                .into_par_iter()
                .map(|a| {
                    let mut c = 0;
                    let tail = &rest[a + 1..];
                    if tail.len() + 1 < size {
                        return 0;
                    }
                    let mut s = Vec::with_capacity(size);
                    for_each_subset_of(tail, size - 1, |t| {
                        s.clear();
                        s.push(rest[a]);
                        s.extend_from_slice(t);
                        if qualifies(h, &s, u, v) {
                            c += 1;
                        }
                    });
                    c
                })
                .sum();
            Ok(ReachCount::exact(count))
        }
        _ => {
            let total = binomial_f64(rest.len() as u64, size as u64);
            let seed = params.seed ^ (u as u64) << 40 ^ (v as u64) << 20 ^ i as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut hits = 0u64;
            for _ in 0..params.samples {
                let mut s: Vec<u32> = sample(&mut rng, rest.len(), size).into_iter().map(|x| rest[x]).collect();
                s.sort_unstable();
                if qualifies(h, &s, u, v) {
                    hits += 1;
                }
            }
            let p = hits as f64 / params.samples as f64;
            let se = (p * (1.0 - p) / params.samples as f64).sqrt();
            Ok(ReachCount { value: p * total, exact: false, std_error: se * total })
        }
    }
}

/// Vertices lying in at least `eps_incidence` weak edges, where an edge is
/// weak if one of its (k-1)-subsets has degree at most `eps_weak`.
pub fn trash_set(h: &Hypergraph, params: &ReachParams) -> Result<Vec<u32>, ReachError> {
    params.validate()?;
    let k = h.k();
    let table = h.degree_table(k - 1)?;
    let ranks = crate::combin::RankTable::new(h.n(), k - 1);
    let mut incidence = vec![0u64; h.n()];
    for e in h.edges() {
        let mut weak = false;
        for_each_subset_of(e, k - 1, |s| weak |= table[ranks.rank(s) as usize] <= params.eps_weak);
        if weak {
            for &v in e {
                incidence[v as usize] += 1;
            }
        }
    }
    Ok((0..h.n() as u32).filter(|&v| incidence[v as usize] >= params.eps_incidence).collect())
}

/// Thresholded order-1 reach graph as adjacency lists over all vertices.
pub fn reach_graph(h: &Hypergraph, tau1: u64) -> Vec<Vec<u32>> {
    let n = h.n() as u32;
    (0..n)
        .into_par_iter()
        .map(|u| (0..n).filter(|&v| v != u && reach_count_1(h, u, v) >= tau1).collect())
        .collect()
}

/// Trash set, then vertices with fewer than `eps_weak` linked partners,
/// then connected components of the thresholded reach graph; components
/// smaller than `eps_weak` also go to the trash. Parts are ordered by
/// decreasing size, ties by smallest vertex.
pub fn reach_partition(h: &Hypergraph, params: &ReachParams) -> Result<VertexPartition, ReachError> {
    params.validate()?;
    let n = h.n();
    let floor = params.eps_weak as usize;
    let mut trash = vec![false; n];
    for v in trash_set(h, params)? {
        trash[v as usize] = true;
    }
    let adj = reach_graph(h, params.tau1);
    for v in 0..n {
        if adj[v].len() < floor {
            trash[v] = true;
        }
    }
    let mut seen = trash.clone();
    let mut parts: Vec<Vec<u32>> = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start as u32];
        let mut stack = vec![start as u32];
        while let Some(x) = stack.pop() {
            for &y in &adj[x as usize] {
                if !seen[y as usize] {
                    seen[y as usize] = true;
                    comp.push(y);
                    stack.push(y);
                }
            }
        }
        comp.sort_unstable();
        if comp.len() < floor {
            for &x in &comp {
                trash[x as usize] = true;
            }
        } else {
            parts.push(comp);
        }
    }
    parts.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let v0 = (0..n as u32).filter(|&v| trash[v as usize]).collect();
    Ok(VertexPartition::new(n, v0, parts).expect("components and trash cover every vertex once"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeOutcome {
    pub partition: VertexPartition,
    /// Part pairs merged, in order, indexed against the partition current
    /// at the time of each merge.
    pub merges: Vec<(usize, usize)>,
    pub lattice: IntegerLattice,
}

/// Merges the first transferral pair of the robust lattice at threshold
/// `tau` until none remains.
pub fn merge_by_transferrals(h: &Hypergraph, p: &VertexPartition, tau: u64) -> MergeOutcome {
    let mut partition = p.clone();
    let mut merges = Vec::new();
    loop {
        let rv = robust_vectors(h, &partition, tau);
        let lattice = IntegerLattice::new(partition.r(), &rv).expect("index vectors of edges are small");
        match lattice.find_transferral() {
            Some((i, j)) => {
                merges.push((i, j));
                partition = partition.merge(i, j);
            }
            None => return MergeOutcome { partition, merges, lattice },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    pub u: u32,
    pub v: u32,
    /// Reach counts at orders `1..=i_max`.
    pub counts: Vec<ReachCount>,
    /// Some order has count at least `tau1`.
    pub reachable: bool,
}

/// Spot check of closedness: up to `pairs_per_part` pairs per part, in
/// order `(first, second), (first, third), ..`, with counts at every order
/// up to `i_max`.
pub fn closedness_check(
    h: &Hypergraph,
    p: &VertexPartition,
    params: &ReachParams,
    pairs_per_part: usize,
) -> Result<Vec<PairCheck>, ReachError> {
    params.validate()?;
    let mut out = Vec::new();
    for part in p.parts() {
        for &v in part.iter().skip(1).take(pairs_per_part) {
            let u = part[0];
            let counts =
                (1..=params.i_max).map(|i| reach_count(h, u, v, i, params)).collect::<Result<Vec<_>, _>>()?;
            let reachable = counts.iter().any(|c| c.value >= params.tau1 as f64);
            out.push(PairCheck { u, v, counts, reachable });
        }
    }
    Ok(out)
}

/// Per-instance test of `N_{beta,i}(x) ⊆ N_{beta',i+1}(x)`: returns the
/// largest `beta'` that works, i.e. the minimum normalized order-`(i+1)`
/// count over vertices that are `(beta, i)`-reachable to `x`, or `None`
/// when one of them has no order-`(i+1)` witness at all. Normalization is
/// by `n^(ik-1)`.
pub fn prop21_witness(
    h: &Hypergraph,
    x: u32,
    i: usize,
    beta: f64,
    params: &ReachParams,
) -> Result<Option<f64>, ReachError> {
    let n = h.n() as f64;
    let norm = |order: usize| n.powi((order * h.k() - 1) as i32);
    let mut best = f64::INFINITY;
    for w in (0..h.n() as u32).filter(|&w| w != x) {
        if reach_count(h, x, w, i, params)?.value >= beta * norm(i) {
            let next = reach_count(h, x, w, i + 1, params)?.value;
            if next == 0.0 {
                return Ok(None);
            }
            best = best.min(next / norm(i + 1));
        }
    }
    Ok(Some(best))
}
