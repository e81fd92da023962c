//! Exact maximum matching by depth-first branch and bound.
//!
//! The search always branches on the lowest vertex that is neither covered
//! nor skipped: either one of the edges whose minimum vertex it is, in
//! lexicographic order, or "skip". Preorder over this tree visits matchings
//! of equal size in lexicographic order of their sorted edge lists, so
//! keeping only strict improvements yields the lexicographically smallest
//! maximum matching.
//!
//! Parallel runs cut the tree into a frontier of subtrees (in preorder),
//! solve each independently with its own node budget, and merge in
//! frontier order. Every subtree's run is deterministic, so the merged
//! report is identical for any thread count.

use super::{Hypergraph, Matching};
use crate::bitset::VertexSet;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::HashSet;
use std::sync::atomic::{AtomicUsize, Ordering};

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

const FRONTIER_TARGET: usize = 64;
const FRONTIER_MAX_DEPTH: usize = 6;
// the live-vertex bound scans every edge, so only use it on small graphs
const LIVE_BOUND_EDGE_LIMIT: usize = 50_000;
// entries of the per-subtree table of failed target-mode states
const FAILED_MEMO_LIMIT: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    /// Stop as soon as a matching of this size is found, or once it is
    /// proved impossible.
    pub target: Option<usize>,
    /// Node limit per subtree; exceeding it yields [`SearchStatus::Undecided`].
    pub node_budget: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { target: None, node_budget: DEFAULT_NODE_BUDGET }
    }
}

impl SolverOptions {
    pub fn target(target: usize) -> Self {
        SolverOptions { target: Some(target), ..Default::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    /// `size` is the exact matching number.
    Optimal,
    /// A matching of the requested size was found.
    TargetReached,
    /// No matching of the requested size exists.
    TargetUnreachable,
    /// The node budget ran out before a decision.
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchingReport {
    pub status: SearchStatus,
    /// Size of `witness`.
    pub size: usize,
    pub witness: Matching,
    pub nodes: u64,
}

impl MatchingReport {
    /// The exact matching number, when the search proved it.
    pub fn maximum(&self) -> Option<usize> {
        (self.status == SearchStatus::Optimal).then_some(self.size)
    }

    pub fn is_decided(&self) -> bool {
        self.status != SearchStatus::Undecided
    }

    /// Whether a matching of `target` edges exists, when the report settles
    /// it. Pass the same target the search ran with.
    pub fn reaches(&self, target: usize) -> Option<bool> {
        if self.size >= target {
            return Some(true);
        }
        match self.status {
            SearchStatus::Optimal | SearchStatus::TargetUnreachable => Some(false),
            _ => None,
        }
    }
}

trait Mask: Clone + Send + Sync {
    fn empty(n: usize) -> Self;
    fn from_set(s: &VertexSet) -> Self;
    fn set(&mut self, v: u32);
    fn test(&self, v: u32) -> bool;
    fn meets(&self, other: &Self) -> bool;
    fn or(&mut self, other: &Self);
    fn unset_from(&mut self, other: &Self);
    fn count(&self) -> usize;
    /// Compact key for memoization, when the mask has one.
    fn key(&self) -> Option<u128>;
}

impl Mask for u128 {
    fn empty(_: usize) -> Self {
        0
    }
    fn from_set(s: &VertexSet) -> Self {
        s.as_u128()
    }
    fn set(&mut self, v: u32) {
        *self |= 1 << v;
    }
    fn test(&self, v: u32) -> bool {
        *self >> v & 1 == 1
    }
    fn meets(&self, other: &Self) -> bool {
        self & other != 0
    }
    fn or(&mut self, other: &Self) {
        *self |= other;
    }
    fn unset_from(&mut self, other: &Self) {
        *self &= !other;
    }
    fn count(&self) -> usize {
        self.count_ones() as usize
    }
    fn key(&self) -> Option<u128> {
        Some(*self)
    }
}

impl Mask for VertexSet {
    fn empty(n: usize) -> Self {
        VertexSet::with_universe(n)
    }
    fn from_set(s: &VertexSet) -> Self {
        s.clone()
    }
    fn set(&mut self, v: u32) {
        self.insert(v);
    }
    fn test(&self, v: u32) -> bool {
        self.contains(v)
    }
    fn meets(&self, other: &Self) -> bool {
        !self.is_disjoint(other)
    }
    fn or(&mut self, other: &Self) {
        self.union_with(other);
    }
    fn unset_from(&mut self, other: &Self) {
        self.difference_with(other);
    }
    fn count(&self) -> usize {
        self.len()
    }
    fn key(&self) -> Option<u128> {
        None
    }
}

#[derive(Clone, Copy)]
enum Mode {
    /// Maximize; subtrees may ignore branches that cannot reach `floor`.
    Max { floor: usize },
    Target { target: usize, skip_budget: usize },
}

#[derive(Clone)]
struct Node<M> {
    decided: M,
    pos: u32,
    chosen: Vec<u32>,
    skipped: usize,
}

struct Ctx<M> {
    n: usize,
    k: usize,
    masks: Vec<M>,
    by_min: Vec<Vec<u32>>,
    live_bound: bool,
}

#[derive(Default)]
struct Outcome {
    best: Option<Vec<u32>>,
    nodes: u64,
    aborted: bool,
    found: bool,
    // target-mode states (decided set, skips) whose subtree has no target
    failed: HashSet<(u128, usize)>,
}

enum Flow {
    Continue,
    Stop,
}

impl<M: Mask> Ctx<M> {
    fn new(h: &Hypergraph) -> Self {
        let mut by_min = vec![Vec::new(); h.n()];
        for (i, e) in h.edges().enumerate() {
            by_min[e[0] as usize].push(i as u32);
        }
        Ctx {
            n: h.n(),
            k: h.k(),
            masks: h.edge_sets().iter().map(M::from_set).collect(),
            by_min,
            live_bound: h.edge_count() <= LIVE_BOUND_EDGE_LIMIT,
        }
    }

    fn root(&self) -> Node<M> {
        Node { decided: M::empty(self.n), pos: 0, chosen: Vec::new(), skipped: 0 }
    }

    fn advance(&self, node: &mut Node<M>) {
        while (node.pos as usize) < self.n && node.decided.test(node.pos) {
            node.pos += 1;
        }
    }

    /// Size of the first leaf in preorder (greedy by vertex order).
    fn greedy_size(&self) -> usize {
        let mut decided = M::empty(self.n);
        let mut size = 0;
        for v in 0..self.n {
            if decided.test(v as u32) {
                continue;
            }
            if let Some(&e) = self.by_min[v].iter().find(|&&e| !self.masks[e as usize].meets(&decided)) {
                decided.or(&self.masks[e as usize]);
                size += 1;
            }
        }
        size
    }

    /// Undecided vertices that lie in some edge avoiding all decided ones.
    fn live_vertices(&self, node: &Node<M>) -> usize {
        let mut live = M::empty(self.n);
        for v in node.pos as usize..self.n {
            if node.decided.test(v as u32) {
                continue;
            }
            for &e in &self.by_min[v] {
                let m = &self.masks[e as usize];
                if !m.meets(&node.decided) {
                    live.or(m);
                }
            }
        }
        live.count()
    }

    fn upper_bound(&self, node: &Node<M>, threshold: usize) -> usize {
        let size = node.chosen.len();
        let ub = size + (self.n - node.decided.count()) / self.k;
        if ub < threshold || !self.live_bound {
            return ub;
        }
        ub.min(size + self.live_vertices(node) / self.k)
    }

    /// Children in preorder: incident edges (lex), then skip. `None` for skip
    /// means the skip branch is not allowed.
    fn children(&self, node: &Node<M>, mode: Mode) -> Vec<Node<M>> {
        let mut out = Vec::new();
        let v = node.pos;
        if v as usize >= self.n {
            return out;
        }
        for &e in &self.by_min[v as usize] {
            let m = &self.masks[e as usize];
            if !m.meets(&node.decided) {
                let mut child = node.clone();
                child.decided.or(m);
                child.chosen.push(e);
                self.advance(&mut child);
                out.push(child);
            }
        }
        let skip_ok = match mode {
            Mode::Target { skip_budget, .. } => node.skipped < skip_budget,
            Mode::Max { .. } => true,
        };
        if skip_ok {
            let mut child = node.clone();
            child.decided.set(v);
            child.skipped += 1;
            self.advance(&mut child);
            out.push(child);
        }
        out
    }

    fn search(&self, node: &mut Node<M>, mode: Mode, budget: u64, out: &mut Outcome, cancel: &dyn Fn() -> bool) -> Flow {
        out.nodes += 1;
        if out.nodes > budget || (out.nodes % 4096 == 0 && cancel()) {
            out.aborted = true;
            return Flow::Stop;
        }
        let size = node.chosen.len();
        let best = out.best.as_ref().map(Vec::len);
        match mode {
            Mode::Target { target, .. } => {
                if size >= target {
                    out.best = Some(node.chosen.clone());
                    out.found = true;
                    return Flow::Stop;
                }
                if best.is_none_or(|b| size > b) {
                    out.best = Some(node.chosen.clone());
                }
                if self.upper_bound(node, target) < target {
                    return Flow::Continue;
                }
                if let Some(key) = node.decided.key() {
                    if out.failed.contains(&(key, node.skipped)) {
                        return Flow::Continue;
                    }
                }
            }
            Mode::Max { floor } => {
                if best.is_none_or(|b| size > b) {
                    out.best = Some(node.chosen.clone());
                }
                let need = best.map_or(floor, |b| floor.max(b + 1));
                if self.upper_bound(node, need) < need {
                    return Flow::Continue;
                }
            }
        }
        let v = node.pos;
        if v as usize >= self.n {
            return Flow::Continue;
        }
        let saved_pos = node.pos;
        for &e in &self.by_min[v as usize] {
            let m = &self.masks[e as usize];
            if m.meets(&node.decided) {
                continue;
            }
            node.decided.or(m);
            node.chosen.push(e);
            self.advance(node);
            let flow = self.search(node, mode, budget, out, cancel);
            node.chosen.pop();
            node.decided.unset_from(m);
            node.pos = saved_pos;
            if let Flow::Stop = flow {
                return Flow::Stop;
            }
        }
        let skip_ok = match mode {
            Mode::Target { skip_budget, .. } => node.skipped < skip_budget,
            Mode::Max { .. } => true,
        };
        if skip_ok {
            node.decided.set(v);
            node.skipped += 1;
            self.advance(node);
            let flow = self.search(node, mode, budget, out, cancel);
            node.skipped -= 1;
            let mut single = M::empty(self.n);
            single.set(v);
            node.decided.unset_from(&single);
            node.pos = saved_pos;
            if let Flow::Stop = flow {
                return Flow::Stop;
            }
        }
        if let (Mode::Target { .. }, Some(key)) = (mode, node.decided.key()) {
            if out.failed.len() < FAILED_MEMO_LIMIT {
                out.failed.insert((key, node.skipped));
            }
        }
        Flow::Continue
    }

    fn frontier(&self, mode: Mode) -> (Vec<Node<M>>, u64) {
        let mut root = self.root();
        self.advance(&mut root);
        let mut frontier = vec![root];
        let mut expanded = 0u64;
        for _ in 0..FRONTIER_MAX_DEPTH {
            if frontier.len() >= FRONTIER_TARGET {
                break;
            }
            let mut next = Vec::new();
            let mut grew = false;
            for node in frontier {
                let terminal = node.pos as usize >= self.n
                    || matches!(mode, Mode::Target { target, .. } if node.chosen.len() >= target);
                if terminal {
                    next.push(node);
                    continue;
                }
                expanded += 1;
                let kids = self.children(&node, mode);
                grew |= !kids.is_empty();
                // an expanded node's own matching reappears down its skip
                // chain, except when skipping is forbidden; keep it as a
                // leaf in that case so it is still recorded
                if matches!(mode, Mode::Target { skip_budget, .. } if node.skipped >= skip_budget) {
                    let mut leaf = node.clone();
                    leaf.pos = self.n as u32;
                    next.push(leaf);
                }
                next.extend(kids);
            }
            frontier = next;
            if !grew {
                break;
            }
        }
        (frontier, expanded)
    }

    fn run(&self, mode: Mode, budget: u64) -> (Option<Vec<u32>>, u64, bool, bool) {
        let (frontier, expanded) = self.frontier(mode);
        let first_found = AtomicUsize::new(usize::MAX);
        let outcomes: Vec<Outcome> = frontier
            .into_par_iter()
            .enumerate()
            .map(|(idx, mut node)| {
                let mut out = Outcome::default();
                let cancel = || first_found.load(Ordering::Relaxed) < idx;
                self.search(&mut node, mode, budget, &mut out, &cancel);
                if out.found {
                    first_found.fetch_min(idx, Ordering::Relaxed);
                }
                out
            })
            .collect();

        match mode {
            Mode::Target { .. } => {
                let mut nodes = expanded;
                let mut aborted = false;
                let mut best: Option<Vec<u32>> = None;
                for out in outcomes {
                    nodes += out.nodes;
                    if out.found {
                        return (out.best, nodes, false, true);
                    }
                    aborted |= out.aborted;
                    if let Some(b) = out.best {
                        if best.as_ref().is_none_or(|cur| b.len() > cur.len()) {
                            best = Some(b);
                        }
                    }
                }
                (best, nodes, aborted, false)
            }
            Mode::Max { .. } => {
                let mut nodes = expanded;
                let mut aborted = false;
                let mut best: Option<Vec<u32>> = None;
                for out in outcomes {
                    nodes += out.nodes;
                    aborted |= out.aborted;
                    if let Some(b) = out.best {
                        if best.as_ref().is_none_or(|cur| b.len() > cur.len()) {
                            best = Some(b);
                        }
                    }
                }
                (best, nodes, aborted, false)
            }
        }
    }
}

fn to_matching(h: &Hypergraph, chosen: &[u32]) -> Matching {
    let edges = chosen.iter().map(|&e| h.edge(e as usize).to_vec()).collect();
    Matching::new(h.n(), h.k(), edges).expect("solver only combines disjoint edges")
}

pub(super) fn solve(h: &Hypergraph, opts: &SolverOptions) -> MatchingReport {
    if h.n() <= 128 {
        solve_with::<u128>(h, opts)
    } else {
        solve_with::<VertexSet>(h, opts)
    }
}

fn solve_with<M: Mask>(h: &Hypergraph, opts: &SolverOptions) -> MatchingReport {
    let ctx = Ctx::<M>::new(h);
    let cap = h.n() / h.k();
    let report = |status, chosen: Option<Vec<u32>>, nodes| {
        let witness = to_matching(h, chosen.as_deref().unwrap_or(&[]));
        MatchingReport { status, size: witness.size(), witness, nodes }
    };
    match opts.target {
        Some(0) => report(SearchStatus::TargetReached, None, 0),
        Some(t) if t > cap => report(SearchStatus::TargetUnreachable, None, 0),
        Some(target) => {
            let mode = Mode::Target { target, skip_budget: h.n() - h.k() * target };
            let (best, nodes, aborted, found) = ctx.run(mode, opts.node_budget);
            let status = if found {
                SearchStatus::TargetReached
            } else if aborted {
                SearchStatus::Undecided
            } else {
                SearchStatus::TargetUnreachable
            };
            report(status, best, nodes)
        }
        None => {
            let floor = ctx.greedy_size();
            let (best, nodes, aborted, _) = ctx.run(Mode::Max { floor }, opts.node_budget);
            let status = if aborted { SearchStatus::Undecided } else { SearchStatus::Optimal };
            report(status, best, nodes)
        }
    }
}
