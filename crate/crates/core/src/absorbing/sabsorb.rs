//! S-absorption for `k >= 6`. An edge `e` disjoint from a (k+2)-set `S`
//! is S-absorbing when two disjoint edges `e1, e2` cover `S` and all but two
//! vertices of `e`, with `|e1 ∩ S| = k-2`, `|e1 ∩ e| = 2`, `|e2 ∩ S| = 4`
//! and `|e2 ∩ e| = k-4`. Swapping `e` for `e1, e2` covers `k` more vertices.

use super::{
    edge_inside, residual_matching, substream, swap_augment, uncovered_mask, AbsorbError, PipelineFailure, ResidualParams,
    Stage,
};
use crate::bitset::VertexSet;
use crate::combin::{binomial, for_each_subset_of};
use crate::hgraph::{Hypergraph, Matching};
use rand::seq::index::sample;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SAbsorptionWitness {
    pub e: Vec<u32>,
    pub e1: Vec<u32>,
    pub e2: Vec<u32>,
    pub s: Vec<u32>,
    /// The two vertices of `e` left uncovered by `e1 ∪ e2`.
    pub uncovered_leftover: Vec<u32>,
}

fn inter(a: &[u32], b: &[u32]) -> usize {
    a.iter().filter(|x| b.contains(x)).count()
}

impl SAbsorptionWitness {
    /// Rechecks every intersection equality from scratch, plus membership
    /// of `e`, `e1`, `e2` in `h`.
    pub fn check(&self, h: &Hypergraph) -> Result<(), AbsorbError> {
        let k = h.k();
        let bad = |msg: &str| Err(AbsorbError::InvalidWitness(msg.into()));
        if self.s.len() != k + 2 || self.uncovered_leftover.len() != 2 {
            return bad("wrong set sizes");
        }
        for (name, x) in [("e", &self.e), ("e1", &self.e1), ("e2", &self.e2)] {
            if !h.contains_edge(x) {
                return Err(AbsorbError::InvalidWitness(format!("{name} = {x:?} is not an edge")));
            }
        }
        let checks = [
            (inter(&self.e1, &self.s), k - 2, "|e1 ∩ S| = k-2"),
            (inter(&self.e1, &self.e), 2, "|e1 ∩ e| = 2"),
            (inter(&self.e2, &self.s), 4, "|e2 ∩ S| = 4"),
            (inter(&self.e2, &self.e), k - 4, "|e2 ∩ e| = k-4"),
            (inter(&self.e1, &self.e2), 0, "e1 ∩ e2 = ∅"),
            (inter(&self.e, &self.s), 0, "e ∩ S = ∅"),
        ];
        for (got, want, name) in checks {
            if got != want {
                return Err(AbsorbError::InvalidWitness(format!("{name} fails: got {got}")));
            }
        }
        let left_ok = self.uncovered_leftover.iter().all(|v| self.e.contains(v) && !self.e1.contains(v) && !self.e2.contains(v));
        if !left_ok {
            return bad("leftover vertices must be the part of e outside e1 ∪ e2");
        }
        Ok(())
    }
}

fn sorted_union(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut v: Vec<u32> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v
}

fn minus(a: &[u32], b: &[u32]) -> Vec<u32> {
    a.iter().copied().filter(|x| !b.contains(x)).collect()
}

/// First witness in lex order of `(S ∩ e2, e ∩ e1, leftover)`, if any.
/// `s` and `e` must be sorted and disjoint.
pub fn find_s_absorbing_witness(h: &Hypergraph, s: &[u32], e: &[u32]) -> Option<SAbsorptionWitness> {
    let k = h.k();
    if k < 6 || s.len() != k + 2 || e.len() != k || inter(s, e) != 0 {
        return None;
    }
    let mut found = None;
    for_each_subset_of(s, 4, |a| {
        if found.is_some() {
            return;
        }
        let s_rest = minus(s, a);
        for_each_subset_of(e, 2, |b| {
            if found.is_some() {
                return;
            }
            let e1 = sorted_union(&s_rest, b);
            if !h.contains_edge(&e1) {
                return;
            }
            let e_rest = minus(e, b);
            for_each_subset_of(&e_rest, 2, |left| {
                if found.is_some() {
                    return;
                }
                let e2 = sorted_union(a, &minus(&e_rest, left));
                if h.contains_edge(&e2) {
                    found = Some(SAbsorptionWitness {
                        e: e.to_vec(),
                        e1: e1.clone(),
                        e2,
                        s: s.to_vec(),
                        uncovered_leftover: left.to_vec(),
                    });
                }
            });
        });
    });
    found
}

fn check_s(h: &Hypergraph, s: &[u32]) -> Result<Vec<u32>, AbsorbError> {
    if h.k() < 6 {
        return Err(AbsorbError::KTooSmall { k: h.k() });
    }
    let mut s = s.to_vec();
    s.sort_unstable();
    s.dedup();
    if s.len() != h.k() + 2 {
        return Err(AbsorbError::BadSetSize { got: s.len(), expected: h.k() + 2 });
    }
    Ok(s)
}

/// Number of S-absorbing edges among the edges of `within` (or of `h`)
/// disjoint from `S`, each certified by a witness that passes
/// [`SAbsorptionWitness::check`].
pub fn count_s_absorbing(h: &Hypergraph, s: &[u32], within: Option<&Matching>) -> Result<u64, AbsorbError> {
    let s = check_s(h, s)?;
    let mask = VertexSet::from_vertices(h.n(), &s);
    let candidates: Vec<Vec<u32>> = match within {
        Some(m) => m.edges().to_vec(),
        None => h.edges().map(<[u32]>::to_vec).collect(),
    };
    let count = candidates
        .par_iter()
        .filter(|e| e.iter().all(|&v| !mask.contains(v)))
        .filter(|e| {
            find_s_absorbing_witness(h, &s, e).is_some_and(|w| {
                debug_assert!(w.check(h).is_ok());
                true
            })
        })
        .count();
    Ok(count as u64)
}

/// Replaces `witness.e` by `witness.e1, witness.e2`, covering `S`.
pub fn absorb_step(h: &Hypergraph, m: &Matching, s: &[u32], witness: &SAbsorptionWitness) -> Result<Matching, AbsorbError> {
    let s = check_s(h, s)?;
    if witness.s != s {
        return Err(AbsorbError::InvalidWitness("witness is for a different S".into()));
    }
    witness.check(h)?;
    if !m.edges().contains(&witness.e) {
        return Err(AbsorbError::EdgeNotInMatching { edge: witness.e.clone() });
    }
    if let Some(&vertex) = s.iter().find(|&&v| m.covers(v)) {
        return Err(AbsorbError::SNotUncovered { vertex });
    }
    let mut next = m.clone();
    next.remove(&witness.e);
    next.push(witness.e1.clone())?;
    next.push(witness.e2.clone())?;
    assert_eq!(next.covered().len(), m.covered().len() + h.k(), "absorption covers exactly k new vertices");
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbsorbParams {
    pub beta: f64,
    pub seed: u64,
    /// Fresh random selections tried before giving up.
    pub retries: usize,
    /// Check every S when there are at most this many, else sample.
    pub exhaustive_limit: u64,
    pub sampled_s: usize,
    pub residual: ResidualParams,
}

impl Default for AbsorbParams {
    fn default() -> Self {
        AbsorbParams {
            beta: 0.1,
            seed: 0,
            retries: 50,
            exhaustive_limit: 1_000_000,
            sampled_s: 2000,
            residual: ResidualParams::default(),
        }
    }
}

/// The absorbing matching `M'` and how it was verified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AbsorbingFamily {
    pub members: Vec<Vec<u32>>,
    pub beta: f64,
    /// Edges per member; always 1 here.
    pub t: usize,
    pub seed: u64,
    /// Attempt index that succeeded.
    pub attempt: usize,
    /// Required absorbing edges per S: `ceil(beta^2 n)`, at least 1.
    pub required: u64,
    pub exhaustive: bool,
    pub checked_sets: u64,
    /// Number of checked S per absorbing-edge count.
    pub histogram: BTreeMap<u64, u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyFailure {
    pub attempts: usize,
    pub message: String,
    pub violating_s: Option<Vec<u32>>,
}

/// Random absorbing matching: each edge is selected with probability
/// `min(1, beta n / |E|)`, intersecting selections are dropped greedily,
/// and the result is capped at `floor(beta n)` edges. The attempt passes
/// when every (k+2)-set of uncovered vertices has at least
/// `ceil(beta^2 n)` S-absorbing edges in `M'`; exhaustively when at most
/// `exhaustive_limit` such sets exist, else on `sampled_s` random ones.
pub fn build_absorbing_matching(h: &Hypergraph, params: &AbsorbParams) -> Result<AbsorbingFamily, FamilyFailure> {
    let (n, k) = (h.n(), h.k());
    let fail = |attempts, message: String, violating_s| Err(FamilyFailure { attempts, message, violating_s });
    if k < 6 {
        return fail(0, format!("S-absorption needs k >= 6, got {k}"), None);
    }
    let cap = (params.beta * n as f64).floor() as usize;
    if cap == 0 || h.edge_count() == 0 {
        return fail(0, "no room for an absorbing matching (beta n < 1 or no edges)".into(), None);
    }
    let required = ((params.beta * params.beta * n as f64).ceil() as u64).max(1);
    let p = (params.beta * n as f64 / h.edge_count() as f64).min(1.0);
    let mut last_violation = None;
    for attempt in 0..params.retries {
        let mut rng = substream(params.seed, 1, attempt as u64);
        let mut members: Vec<Vec<u32>> = Vec::new();
        let mut used = VertexSet::with_universe(n);
        for (i, mask) in h.edge_sets().iter().enumerate() {
            if rng.gen::<f64>() < p && members.len() < cap && used.is_disjoint(mask) {
                used.union_with(mask);
                members.push(h.edge(i).to_vec());
            }
        }
        if members.is_empty() {
            continue;
        }
        let m = Matching::new(n, k, members.clone()).expect("members are disjoint");
        let free: Vec<u32> = (0..n as u32).filter(|&v| !used.contains(v)).collect();
        let total = binomial(free.len() as u64, (k + 2) as u64);
        let exhaustive = total.is_some_and(|t| t <= params.exhaustive_limit);
        let sets: Vec<Vec<u32>> = if free.len() < k + 2 {
            Vec::new()
        } else if exhaustive {
            let mut all = Vec::new();
            for_each_subset_of(&free, k + 2, |s| all.push(s.to_vec()));
            all
        } else {
            let mut srng = substream(params.seed, 2, attempt as u64);
            (0..params.sampled_s)
                .map(|_| {
                    let mut s: Vec<u32> = sample(&mut srng, free.len(), k + 2).into_iter().map(|i| free[i]).collect();
                    s.sort_unstable();
                    s
                })
                .collect()
        };
        let counts: Vec<u64> =
            sets.par_iter().map(|s| count_s_absorbing(h, s, Some(&m)).expect("sizes checked")).collect();
        match counts.iter().position(|&c| c < required) {
            Some(i) => last_violation = Some(sets[i].clone()),
            None => {
                let mut histogram = BTreeMap::new();
                for c in counts {
                    *histogram.entry(c).or_insert(0) += 1;
                }
                return Ok(AbsorbingFamily {
                    members,
                    beta: params.beta,
                    t: 1,
                    seed: params.seed,
                    attempt,
                    required,
                    exhaustive,
                    checked_sets: sets.len() as u64,
                    histogram,
                });
            }
        }
    }
    fail(params.retries, format!("no valid absorbing matching in {} attempts", params.retries), last_violation)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AbsorbTrace {
    pub family_size: usize,
    pub family_attempt: usize,
    pub histogram: BTreeMap<u64, u64>,
    pub residual_edges: usize,
    pub uncovered_after_residual: usize,
    pub iterations: usize,
    pub direct_edges: usize,
    pub absorptions: usize,
    pub swaps: usize,
    pub final_size: usize,
}

/// Absorbing matching `M'`, a residual matching on the rest, then rounds
/// that each cover `k` more vertices: an edge inside the uncovered set if
/// one exists, else absorbing the first `k+2` uncovered vertices through an
/// unused edge of `M'`, else trading one matching edge for two. Stops at
/// `n mod k` uncovered vertices and certifies the result.
pub fn npm_via_absorption(h: &Hypergraph, params: &AbsorbParams) -> Result<(Matching, AbsorbTrace), PipelineFailure<AbsorbTrace>> {
    let (n, k) = (h.n(), h.k());
    let mut trace = AbsorbTrace::default();
    macro_rules! fail {
        ($stage:expr, $($msg:tt)*) => {
            return Err(PipelineFailure { stage: $stage, message: format!($($msg)*), trace })
        };
    }
    if k < 6 || n % k == 0 {
        fail!(Stage::Precondition, "needs k >= 6 and k not dividing n, got n = {n}, k = {k}");
    }
    let family = match build_absorbing_matching(h, params) {
        Ok(f) => f,
        Err(e) => fail!(Stage::AbsorbingFamily, "{} (violating S: {:?})", e.message, e.violating_s),
    };
    trace.family_size = family.members.len();
    trace.family_attempt = family.attempt;
    trace.histogram = family.histogram.clone();

    let mut m = Matching::new(n, k, family.members.clone()).expect("members are disjoint");
    let rest: Vec<u32> = m.uncovered();
    for e in residual_matching(h, &rest, &params.residual) {
        m.push(e).expect("residual edges avoid M'");
        trace.residual_edges += 1;
    }
    trace.uncovered_after_residual = n - m.covered().len();

    let mut absorbers = family.members.clone();
    let target = n % k;
    let max_iterations = trace.uncovered_after_residual / k + 1;
    while n - m.covered().len() > target {
        trace.iterations += 1;
        if trace.iterations > max_iterations {
            fail!(Stage::AbsorptionLoop, "uncovered count failed to drop by k per round");
        }
        let pool = uncovered_mask(&m);
        if let Some(e) = edge_inside(h, &pool) {
            m.push(e).expect("inside uncovered set");
            trace.direct_edges += 1;
            continue;
        }
        let uncovered = m.uncovered();
        if uncovered.len() >= k + 2 {
            let s = &uncovered[..k + 2];
            let hit = absorbers.iter().enumerate().find_map(|(i, e)| find_s_absorbing_witness(h, s, e).map(|w| (i, w)));
            if let Some((i, w)) = hit {
                m = match absorb_step(h, &m, s, &w) {
                    Ok(next) => next,
                    Err(err) => fail!(Stage::AbsorptionLoop, "absorb step rejected: {err}"),
                };
                absorbers.remove(i);
                trace.absorptions += 1;
                continue;
            }
        }
        if swap_augment(h, &mut m, &pool, &absorbers) {
            trace.swaps += 1;
            continue;
        }
        fail!(Stage::AbsorptionLoop, "{} vertices uncovered and no absorbing edge or swap applies", uncovered.len());
    }
    trace.final_size = m.size();
    if let Err(e) = m.certify(h) {
        fail!(Stage::Certificate, "{e}");
    }
    if m.size() != n / k {
        fail!(Stage::Certificate, "size {} is not floor(n/k) = {}", m.size(), n / k);
    }
    Ok((m, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::absorbing::ResidualMode;
    use crate::constructions::{admissible_first_part_sizes, divisibility_barrier};
    use crate::hgraph::{generate, Model, SolverOptions};

    #[test]
    fn complete_graph_counts() {
        let h = Hypergraph::complete(20, 6).unwrap();
        let s: Vec<u32> = (0..8).collect();
        assert_eq!(count_s_absorbing(&h, &s, None).unwrap(), 924);
        assert_eq!(count_s_absorbing(&Hypergraph::empty(20, 6).unwrap(), &s, None).unwrap(), 0);
        // every edge meets S
        let meeting = Hypergraph::build(20, 6, &[vec![0, 8, 9, 10, 11, 12], vec![1, 13, 14, 15, 16, 17]]).unwrap();
        assert_eq!(count_s_absorbing(&meeting, &s, None).unwrap(), 0);
        assert!(matches!(count_s_absorbing(&Hypergraph::complete(9, 4).unwrap(), &[0, 1, 2, 3, 4, 5], None), Err(AbsorbError::KTooSmall { .. })));
        assert!(matches!(count_s_absorbing(&h, &[0, 1], None), Err(AbsorbError::BadSetSize { .. })));
    }

    #[test]
    fn witness_satisfies_equalities() {
        let h = generate(16, 6, Model::Random { p: 0.6, seed: 2 }).unwrap();
        let s: Vec<u32> = (0..8).collect();
        let mut checked = 0;
        for e in h.edges().filter(|e| e[0] >= 8) {
            if let Some(w) = find_s_absorbing_witness(&h, &s, e) {
                w.check(&h).unwrap();
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn absorb_step_covers_k_more() {
        let h = Hypergraph::complete(20, 6).unwrap();
        let e: Vec<u32> = (10..16).collect();
        let m = Matching::new(20, 6, vec![e.clone()]).unwrap();
        let s: Vec<u32> = (0..8).collect();
        let w = find_s_absorbing_witness(&h, &s, &e).unwrap();
        let next = absorb_step(&h, &m, &s, &w).unwrap();
        assert_eq!(next.covered().len(), m.covered().len() + 6);
        next.certify(&h).unwrap();

        let other = Matching::new(20, 6, vec![(14..20).collect()]).unwrap();
        assert!(matches!(absorb_step(&h, &other, &s, &w), Err(AbsorbError::EdgeNotInMatching { .. })));
        let mut covered = m.clone();
        covered.push(vec![0, 1, 2, 3, 4, 5]).unwrap();
        let s2: Vec<u32> = vec![0, 1, 2, 3, 4, 5, 6, 7];
        assert!(matches!(absorb_step(&h, &covered, &s2, &w), Err(AbsorbError::SNotUncovered { .. })));
    }

    #[test]
    fn absorbing_matching_on_complete_graph() {
        let h = Hypergraph::complete(32, 6).unwrap();
        for seed in 0..3 {
            let params = AbsorbParams { beta: 0.1, seed, ..Default::default() };
            let f = build_absorbing_matching(&h, &params).unwrap();
            assert!(!f.members.is_empty() && f.members.len() <= 3);
            assert!(f.checked_sets > 0);
            assert_eq!(f, build_absorbing_matching(&h, &params).unwrap());
        }
        let empty = Hypergraph::empty(32, 6).unwrap();
        assert!(build_absorbing_matching(&empty, &AbsorbParams::default()).is_err());
    }

    #[test]
    fn pipeline_on_complete_and_random() {
        let h = Hypergraph::complete(32, 6).unwrap();
        let (m, _) = npm_via_absorption(&h, &AbsorbParams::default()).unwrap();
        assert_eq!(m.size(), 5);
        let h = generate(32, 6, Model::Random { p: 0.9, seed: 4 }).unwrap();
        let (m, _) = npm_via_absorption(&h, &AbsorbParams { seed: 4, ..Default::default() }).unwrap();
        m.certify(&h).unwrap();
        assert_eq!(m.size(), 5);
    }

    #[test]
    fn pipeline_loop_does_the_work_when_residual_is_skipped() {
        let h = generate(32, 6, Model::Random { p: 0.9, seed: 8 }).unwrap();
        let residual = ResidualParams { mode: ResidualMode::Skip, ..Default::default() };
        let params = AbsorbParams { seed: 8, residual, ..Default::default() };
        let (m, trace) = npm_via_absorption(&h, &params).unwrap();
        assert_eq!(m.size(), 5);
        assert!(trace.iterations >= 2);
        assert_eq!(trace.direct_edges + trace.absorptions + trace.swaps, trace.iterations);
    }

    #[test]
    fn pipeline_never_lies_on_barriers() {
        // l = 2 at k = 6 with n = 14
        let (n, k, ell) = (14, 6, 2);
        for j in 0..=ell + 1 {
            for n1 in admissible_first_part_sizes(n, k, ell, j).unwrap().into_iter().take(2) {
                let (h, _) = divisibility_barrier(n, k, ell, j, n1).unwrap();
                let exact = h.matching_number(&SolverOptions::target(n / k));
                let light = AbsorbParams { retries: 2, sampled_s: 100, ..Default::default() };
                if let Ok((m, _)) = npm_via_absorption(&h, &light) {
                    m.certify(&h).unwrap();
                    assert_eq!(exact.reaches(n / k), Some(true));
                }
            }
        }
        assert_eq!(
            npm_via_absorption(&Hypergraph::complete(12, 6).unwrap(), &AbsorbParams::default()).unwrap_err().stage,
            Stage::Precondition
        );
    }
}
