//! Lattice-driven absorption. Partition by reachability, merge parts along
//! transferrals, reserve edges for each robust vector, then absorb leftover
//! vertices `k` at a time: pick an index `i` with `i_P(U) - u_i` in the
//! lattice, turn `U` into a set whose index vector lies in the lattice,
//! decompose that vector over robust vectors, and cover the pieces either
//! directly or through an absorbing set of the family.

use super::{edge_inside, residual_matching, substream, uncovered_mask, PipelineFailure, ResidualParams, Stage};
use crate::bitset::VertexSet;
use crate::combin::for_each_combination;
use crate::hgraph::{Hypergraph, Matching};
use crate::lattice::{
    coefficient_bound, decompose_vector, robust_vectors, s_vectors, IndexVector, IntegerLattice, VertexPartition,
};
use crate::reachability::{merge_by_transferrals, reach_partition, ReachParams};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticePipelineParams {
    pub reach: ReachParams,
    /// Robust-vector threshold: minimum number of edges per index vector.
    pub tau: u64,
    /// Reserve matchings hold `max(1, ceil(C alpha^2 n))` edges per vector.
    pub alpha: f64,
    /// Edges per absorbing set.
    pub family_t: usize,
    /// Most absorbing sets to build; `None` means `max(1, floor(n / 2k))`.
    pub family_cap: Option<usize>,
    /// Absorbers wanted per robust k-set outside the family.
    pub absorber_floor: u64,
    pub seed: u64,
    pub residual: ResidualParams,
}

impl Default for LatticePipelineParams {
    fn default() -> Self {
        LatticePipelineParams {
            reach: ReachParams::default(),
            tau: 1,
            alpha: 0.2,
            family_t: 1,
            family_cap: None,
            absorber_floor: 1,
            seed: 0,
            residual: ResidualParams::default(),
        }
    }
}

/// Disjoint absorbing sets, each spanned by a perfect matching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeFamily {
    pub members: Vec<Vec<u32>>,
    /// Perfect matching of each member.
    pub matchings: Vec<Vec<Vec<u32>>>,
    pub t: usize,
    pub seed: u64,
    pub floor: u64,
    /// Robust k-sets checked when the family stopped growing.
    pub targets: u64,
    /// Of those, how many have fewer than `floor` absorbers.
    pub unsatisfied: u64,
}

// k-sets outside V0 and `used` whose index vector is robust
fn absorption_targets(h: &Hypergraph, p: &VertexPartition, robust: &[IndexVector], used: &VertexSet) -> Vec<Vec<u32>> {
    let free: Vec<u32> = (0..h.n() as u32).filter(|&v| p.part_of(v).is_some() && !used.contains(v)).collect();
    let mut out = Vec::new();
    if free.len() < h.k() {
        return out;
    }
    for_each_combination(free.len(), h.k(), |idx| {
        let s: Vec<u32> = idx.iter().map(|&i| free[i as usize]).collect();
        if robust.contains(&p.index_vector(&s)) {
            out.push(s);
        }
    });
    out
}

// perfect matching of h[T ∪ F]
fn absorbs(h: &Hypergraph, member: &[u32], f: &[u32]) -> Option<Vec<Vec<u32>>> {
    let mut all: Vec<u32> = member.iter().chain(f).copied().collect();
    all.sort_unstable();
    h.perfect_matching_within(&all)
}

/// Grows a family of disjoint absorbing sets, each the union of `family_t`
/// disjoint edges avoiding `V0`, taken in a seeded order, until every
/// robust k-set outside the family has `absorber_floor` absorbers or the
/// cap is reached.
pub fn lattice_absorbing_family(
    h: &Hypergraph,
    p: &VertexPartition,
    robust: &[IndexVector],
    params: &LatticePipelineParams,
) -> LatticeFamily {
    let (n, k) = (h.n(), h.k());
    let t = params.family_t.max(1);
    let cap = params.family_cap.unwrap_or((n / (2 * k)).max(1));
    let mut order: Vec<usize> = (0..h.edge_count()).filter(|&i| p.avoids_trash(h.edge(i))).collect();
    order.shuffle(&mut substream(params.seed, 10, 0));

    let mut used = VertexSet::with_universe(n);
    let mut members: Vec<Vec<u32>> = Vec::new();
    let mut matchings: Vec<Vec<Vec<u32>>> = Vec::new();
    let unsatisfied_now = |members: &[Vec<u32>], used: &VertexSet| {
        let targets = absorption_targets(h, p, robust, used);
        let bad = targets
            .iter()
            .filter(|s| (members.iter().filter(|m| absorbs(h, m, s).is_some()).count() as u64) < params.absorber_floor)
            .count();
        (targets.len() as u64, bad as u64)
    };
    let (mut targets, mut unsatisfied) = unsatisfied_now(&members, &used);
    let mut cursor = 0;
    while unsatisfied > 0 && members.len() < cap {
        let mut edges: Vec<Vec<u32>> = Vec::new();
        let mut taken = used.clone();
        while edges.len() < t && cursor < order.len() {
            let i = order[cursor];
            cursor += 1;
            if taken.is_disjoint(&h.edge_sets()[i]) {
                taken.union_with(&h.edge_sets()[i]);
                edges.push(h.edge(i).to_vec());
            }
        }
        if edges.len() < t {
            break;
        }
        let mut member: Vec<u32> = edges.concat();
        member.sort_unstable();
        used = taken;
        members.push(member);
        matchings.push(edges);
        (targets, unsatisfied) = unsatisfied_now(&members, &used);
    }
    LatticeFamily { members, matchings, t, seed: params.seed, floor: params.absorber_floor, targets, unsatisfied }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LatticeTrace {
    pub r_initial: usize,
    pub r: usize,
    pub merges: Vec<(usize, usize)>,
    pub trash_size: usize,
    pub robust_vectors: Vec<IndexVector>,
    pub basis: Vec<IndexVector>,
    pub coefficient_bound: u64,
    pub family_size: usize,
    pub family_unsatisfied: u64,
    pub reserve_sizes: Vec<usize>,
    pub reserve_consumed: Vec<usize>,
    pub trash_covered: usize,
    pub residual_edges: usize,
    pub uncovered_after_residual: usize,
    pub iterations: usize,
    pub direct_edges: usize,
    pub decompositions: usize,
    pub family_absorptions: usize,
    pub final_size: usize,
}

struct State<'a> {
    h: &'a Hypergraph,
    p: VertexPartition,
    lattice: IntegerLattice,
    robust: Vec<IndexVector>,
    bound: u64,
    m: Matching,
    reserve: Vec<Vec<Vec<u32>>>,
    consumed: Vec<usize>,
    family: LatticeFamily,
    family_used: Vec<bool>,
}

struct Plan {
    m: Matching,
    consumed: Vec<usize>,
    family_used: Vec<bool>,
    absorptions: usize,
}

impl State<'_> {
    /// Covers `u_prime` (plus pulled reserve edges) by k-sets matching the
    /// decomposition of its index vector; `borrowed` is a reserve edge
    /// `(vector, slot)` already folded into `u_prime`.
    fn try_cover(&self, u_prime: &[u32], borrowed: Option<(usize, usize)>) -> Option<Plan> {
        let w = self.p.index_vector(u_prime);
        let dec = decompose_vector(&w, &self.robust, self.bound).ok()?;
        let mut m = self.m.clone();
        let mut consumed = self.consumed.clone();
        let mut family_used = self.family_used.clone();
        if let Some((vi, slot)) = borrowed {
            debug_assert_eq!(slot, consumed[vi]);
            m.remove(&self.reserve[vi][slot]);
            consumed[vi] += 1;
        }
        let mut pool: Vec<u32> = u_prime.to_vec();
        for (vi, &c) in dec.c.iter().enumerate() {
            for _ in 0..c {
                let e = self.reserve[vi].get(consumed[vi])?;
                m.remove(e);
                pool.extend_from_slice(e);
                consumed[vi] += 1;
            }
        }
        // group by part, then cut k-sets following b
        let mut by_part: Vec<Vec<u32>> = vec![Vec::new(); self.p.r()];
        pool.sort_unstable();
        for &x in &pool {
            by_part[self.p.part_of(x)?].push(x);
        }
        let mut cursor = vec![0usize; self.p.r()];
        let mut absorptions = 0;
        for (vi, &b) in dec.b.iter().enumerate() {
            for _ in 0..b {
                let mut f = Vec::with_capacity(self.h.k());
                for (c, &need) in self.robust[vi].iter().enumerate() {
                    let need = need as usize;
                    f.extend_from_slice(by_part[c].get(cursor[c]..cursor[c] + need)?);
                    cursor[c] += need;
                }
                f.sort_unstable();
                if self.h.contains_edge(&f) {
                    m.push(f).ok()?;
                    continue;
                }
                let (ti, pm) = (0..self.family.members.len())
                    .filter(|&ti| !family_used[ti])
                    .find_map(|ti| absorbs(self.h, &self.family.members[ti], &f).map(|pm| (ti, pm)))?;
                for e in &self.family.matchings[ti] {
                    m.remove(e);
                }
                for e in pm {
                    m.push(e).ok()?;
                }
                family_used[ti] = true;
                absorptions += 1;
            }
        }
        Some(Plan { m, consumed, family_used, absorptions })
    }

    /// One round covering `k` more vertices through the lattice.
    fn absorb_round(&self, u: &[u32]) -> Option<Plan> {
        let i = self.lattice.find_absorbable_index(u, &self.p)?;
        let in_part: Vec<u32> = u.iter().copied().filter(|&x| self.p.part_of(x) == Some(i)).collect();
        if !in_part.is_empty() {
            return in_part.iter().find_map(|&x| {
                let u_prime: Vec<u32> = u.iter().copied().filter(|&y| y != x).collect();
                self.try_cover(&u_prime, None)
            });
        }
        (0..self.robust.len()).filter(|&vi| self.robust[vi][i] > 0).find_map(|vi| {
            let slot = self.consumed[vi];
            let e = self.reserve[vi].get(slot)?;
            let x = *e.iter().find(|&&y| self.p.part_of(y) == Some(i))?;
            let mut u_prime: Vec<u32> = u.iter().chain(e.iter()).copied().filter(|&y| y != x).collect();
            u_prime.sort_unstable();
            self.try_cover(&u_prime, Some((vi, slot)))
        })
    }
}

/// Runs the lattice pipeline end to end. Every stage failure is reported
/// with the trace gathered so far; a success is certified from scratch.
pub fn lattice_absorbing_pipeline(
    h: &Hypergraph,
    params: &LatticePipelineParams,
) -> Result<(Matching, LatticeTrace), PipelineFailure<LatticeTrace>> {
    let (n, k) = (h.n(), h.k());
    let mut trace = LatticeTrace::default();
    macro_rules! fail {
        ($stage:expr, $($msg:tt)*) => {
            return Err(PipelineFailure { stage: $stage, message: format!($($msg)*), trace })
        };
    }
    if n % k == 0 {
        fail!(Stage::Precondition, "k = {k} divides n = {n}");
    }
    let p0 = match reach_partition(h, &params.reach) {
        Ok(p) => p,
        Err(e) => fail!(Stage::Partition, "{e}"),
    };
    trace.r_initial = p0.r();
    trace.trash_size = p0.trash().len();
    if p0.r() == 0 {
        fail!(Stage::Partition, "every vertex landed in the trash");
    }
    let merged = merge_by_transferrals(h, &p0, params.tau);
    let p = merged.partition;
    trace.r = p.r();
    trace.merges = merged.merges;
    let robust = robust_vectors(h, &p, params.tau);
    let lattice = merged.lattice;
    trace.robust_vectors = robust.clone();
    trace.basis = lattice.basis().to_vec();
    if robust.is_empty() {
        fail!(Stage::Lattice, "no robust edge-vectors at tau = {}", params.tau);
    }
    let targets: Vec<IndexVector> =
        s_vectors(p.r(), k).into_iter().chain(s_vectors(p.r(), 2 * k)).filter(|v| lattice.contains(v)).collect();
    let bound = match coefficient_bound(&robust, &targets) {
        Ok(b) => b,
        Err(e) => fail!(Stage::Lattice, "{e}"),
    };
    trace.coefficient_bound = bound;

    let family = lattice_absorbing_family(h, &p, &robust, params);
    trace.family_size = family.members.len();
    trace.family_unsatisfied = family.unsatisfied;
    let mut m = Matching::empty(n, k);
    for edges in &family.matchings {
        for e in edges {
            m.push(e.clone()).expect("family members are disjoint");
        }
    }

    let reserve_size = ((bound as f64 * params.alpha * params.alpha * n as f64).ceil() as usize).max(1);
    let mut reserve: Vec<Vec<Vec<u32>>> = Vec::with_capacity(robust.len());
    for (vi, v) in robust.iter().enumerate() {
        let mut order: Vec<usize> = (0..h.edge_count()).filter(|&i| p.avoids_trash(h.edge(i))).collect();
        order.shuffle(&mut substream(params.seed, 11, vi as u64));
        let mut chosen = Vec::new();
        for i in order {
            if chosen.len() == reserve_size {
                break;
            }
            let e = h.edge(i);
            if e.iter().all(|&x| !m.covers(x)) && p.index_vector(e) == *v {
                m.push(e.to_vec()).expect("checked disjoint");
                chosen.push(e.to_vec());
            }
        }
        reserve.push(chosen);
    }
    trace.reserve_sizes = reserve.iter().map(Vec::len).collect();

    for &v in p.trash() {
        if m.covers(v) {
            continue;
        }
        let pick = h.edges().find(|e| e.contains(&v) && e.iter().all(|&x| !m.covers(x))).map(<[u32]>::to_vec);
        if let Some(e) = pick {
            m.push(e).expect("checked disjoint");
            trace.trash_covered += 1;
        }
    }

    let rest = m.uncovered();
    for e in residual_matching(h, &rest, &params.residual) {
        m.push(e).expect("residual edges avoid covered vertices");
        trace.residual_edges += 1;
    }
    trace.uncovered_after_residual = n - m.covered().len();

    let mut state = State {
        h,
        p,
        lattice,
        robust,
        bound,
        m,
        consumed: vec![0; reserve.len()],
        reserve,
        family_used: vec![false; family.members.len()],
        family,
    };
    let goal = n % k;
    let max_iterations = trace.uncovered_after_residual / k + 1;
    while n - state.m.covered().len() > goal {
        trace.iterations += 1;
        if trace.iterations > max_iterations {
            fail!(Stage::AbsorptionLoop, "uncovered count failed to drop by k per round");
        }
        let before = state.m.covered().len();
        if let Some(e) = edge_inside(h, &uncovered_mask(&state.m)) {
            state.m.push(e).expect("inside uncovered set");
            trace.direct_edges += 1;
            continue;
        }
        let free: Vec<u32> = state.m.uncovered().into_iter().filter(|&x| state.p.part_of(x).is_some()).collect();
        if free.len() < k + 1 {
            trace.reserve_consumed = state.consumed.clone();
            fail!(Stage::AbsorptionLoop, "only {} uncovered vertices outside V0; trash vertices stay uncovered", free.len());
        }
        let Some(plan) = state.absorb_round(&free[..k + 1]) else {
            trace.reserve_consumed = state.consumed.clone();
            fail!(Stage::AbsorptionLoop, "no absorbable index, decomposition, or absorber for U = {:?}", &free[..k + 1]);
        };
        assert_eq!(plan.m.covered().len(), before + k, "each round covers exactly k vertices");
        for (vi, &c) in plan.consumed.iter().enumerate() {
            assert!(c <= state.reserve[vi].len(), "reserve consumption stays within the reserve");
        }
        state.m = plan.m;
        state.consumed = plan.consumed;
        state.family_used = plan.family_used;
        trace.decompositions += 1;
        trace.family_absorptions += plan.absorptions;
    }
    trace.reserve_consumed = state.consumed.clone();
    trace.final_size = state.m.size();
    if let Err(e) = state.m.certify(h) {
        fail!(Stage::Certificate, "{e}");
    }
    if state.m.size() != n / k {
        fail!(Stage::Certificate, "size {} is not floor(n/k) = {}", state.m.size(), n / k);
    }
    Ok((state.m, trace))
}
