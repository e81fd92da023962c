//! Verification suites: barrier instances checked by the exact solver,
//! degree formulas against enumeration, bounds on `g`, and lattice
//! operations against brute-force coefficient enumeration.

use crate::combin::for_each_combination;
use crate::constructions::{admissible_first_part_sizes, divisibility_barrier, space_barrier};
use crate::hgraph::{SearchStatus, SolverOptions, DEFAULT_NODE_BUDGET};
use crate::lattice::{brute_force_contains, s_vectors, IndexVector, IntegerLattice};
use crate::thresholds::{finite_min_degree, g_bounds_check, g_optimize, g_zero_predicate, half_point_exact};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::collections::{HashSet, VecDeque};
use std::fmt::Write as _;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Barriers,
    DegreeFormulas,
    Bounds,
    LatticeRegressions,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown suite {0:?}; expected barriers, degree-formulas, bounds, or lattice-regressions")]
pub struct UnknownSuite(pub String);

impl FromStr for Suite {
    type Err = UnknownSuite;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "barriers" => Ok(Suite::Barriers),
            "degree-formulas" => Ok(Suite::DegreeFormulas),
            "bounds" => Ok(Suite::Bounds),
            "lattice-regressions" => Ok(Suite::LatticeRegressions),
            other => Err(UnknownSuite(other.to_string())),
        }
    }
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Barriers => "barriers",
            Suite::DegreeFormulas => "degree-formulas",
            Suite::Bounds => "bounds",
            Suite::LatticeRegressions => "lattice-regressions",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyLimits {
    pub kmax: usize,
    pub nmax: usize,
    /// Solver node budget per frontier subtree.
    pub budget: u64,
    pub seed: u64,
    /// Random generator sets for the lattice suite.
    pub samples: usize,
}

impl Default for VerifyLimits {
    fn default() -> Self {
        VerifyLimits { kmax: 4, nmax: 14, budget: DEFAULT_NODE_BUDGET, seed: 0, samples: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyCase {
    pub id: String,
    pub expected: String,
    pub got: String,
    pub pass: bool,
    /// The resource budget ran out before the case was decided.
    pub undecided: bool,
}

impl VerifyCase {
    fn new(id: String, expected: impl ToString, got: impl ToString, pass: bool) -> Self {
        VerifyCase { id, expected: expected.to_string(), got: got.to_string(), pass, undecided: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyStatus {
    Pass,
    Fail,
    Undecided,
}

impl VerifyStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            VerifyStatus::Pass => 0,
            VerifyStatus::Fail => 1,
            VerifyStatus::Undecided => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerifyReport {
    pub suite: String,
    pub cases: Vec<VerifyCase>,
    /// Instances skipped on purpose, with the reason.
    pub notes: Vec<String>,
    pub status: VerifyStatus,
}

impl VerifyReport {
    pub fn new(suite: &str, cases: Vec<VerifyCase>, notes: Vec<String>) -> Self {
        let status = if cases.iter().any(|c| !c.pass && !c.undecided) {
            VerifyStatus::Fail
        } else if cases.iter().any(|c| c.undecided) {
            VerifyStatus::Undecided
        } else {
            VerifyStatus::Pass
        };
        VerifyReport { suite: suite.to_string(), cases, notes, status }
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn passed(&self) -> usize {
        self.cases.iter().filter(|c| c.pass).count()
    }

    /// One line per case plus a summary line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.cases {
            let tag = if c.pass {
                "PASS"
            } else if c.undecided {
                "UNDECIDED"
            } else {
                "FAIL"
            };
            let _ = writeln!(out, "{tag} {}: expected {}, got {}", c.id, c.expected, c.got);
        }
        for n in &self.notes {
            let _ = writeln!(out, "NOTE {n}");
        }
        let _ = writeln!(out, "{}: {}/{} passed, status {:?}", self.suite, self.passed(), self.cases.len(), self.status);
        out
    }

    /// Concatenates reports into one under `suite`.
    pub fn combine(suite: &str, parts: Vec<VerifyReport>) -> Self {
        let mut cases = Vec::new();
        let mut notes = Vec::new();
        for p in parts {
            cases.extend(p.cases);
            notes.extend(p.notes);
        }
        VerifyReport::new(suite, cases, notes)
    }
}

pub fn run_suite(suite: Suite, limits: &VerifyLimits) -> VerifyReport {
    match suite {
        Suite::Barriers => VerifyReport::combine(
            suite.name(),
            vec![
                divisibility_barrier_cases(limits.kmax, limits.nmax, limits.budget),
                space_barrier_cases(3..=limits.kmax, limits.nmax, 4, limits.budget),
            ],
        ),
        Suite::DegreeFormulas => degree_formula_cases(limits.kmax, limits.nmax),
        Suite::Bounds => VerifyReport::combine(
            suite.name(),
            vec![bound_cases(limits.kmax), half_point_cases(40), zero_cases(limits.kmax.min(8))],
        ),
        Suite::LatticeRegressions => VerifyReport::combine(
            suite.name(),
            vec![lattice_claim_cases(), lattice_random_cases(limits.seed, limits.samples)],
        ),
    }
}

/// Every `(k, l, j, n, n1)` with `3 <= k <= kmax`, `1 <= l <= k-1`,
/// `n ≡ l mod k`, `k < n <= nmax`, and `n1` admissible, in that order.
pub fn divisibility_instances(kmax: usize, nmax: usize) -> Vec<(usize, usize, usize, usize, usize)> {
    let mut out = Vec::new();
    for k in 3..=kmax {
        for ell in 1..k {
            for j in 0..ell + 2 {
                for n in (k + ell..=nmax).step_by(k) {
                    for n1 in admissible_first_part_sizes(n, k, ell, j).unwrap_or_default() {
                        out.push((k, ell, j, n, n1));
                    }
                }
            }
        }
    }
    out
}

fn solver_case(id: String, h: &crate::hgraph::Hypergraph, target: usize, want: bool, budget: u64) -> VerifyCase {
    let report = h.matching_number(&SolverOptions { target: Some(target), node_budget: budget });
    let expected = if want { format!("matching of size {target}") } else { format!("no matching of size {target}") };
    match report.reaches(target) {
        Some(got) => {
            let text = if got { format!("size {} found", report.size) } else { format!("max size < {target}") };
            VerifyCase::new(id, expected, text, got == want)
        }
        None => VerifyCase {
            id,
            expected,
            got: format!("undecided after {} nodes", report.nodes),
            pass: false,
            undecided: report.status == SearchStatus::Undecided,
        },
    }
}

/// Divisibility barriers have no near perfect matching.
pub fn divisibility_barrier_cases(kmax: usize, nmax: usize, budget: u64) -> VerifyReport {
    let cases = divisibility_instances(kmax, nmax)
        .into_par_iter()
        .map(|(k, ell, j, n, n1)| {
            let id = format!("divisibility k={k} ell={ell} j={j} n={n} n1={n1}");
            let (h, _) = divisibility_barrier(n, k, ell, j, n1).expect("admissible instance");
            solver_case(id, &h, n / k, false, budget)
        })
        .collect();
    VerifyReport::new("divisibility-barriers", cases, Vec::new())
}

/// Space barriers `H(s)` with `1 <= s <= smax`, `sk < n <= nmax` have
/// matching number exactly `s`.
pub fn space_barrier_cases(
    ks: std::ops::RangeInclusive<usize>,
    nmax: usize,
    smax: usize,
    budget: u64,
) -> VerifyReport {
    let mut inst = Vec::new();
    for k in ks {
        for n in k + 1..=nmax {
            for s in (1..=smax).filter(|&s| s * k < n) {
                inst.push((k, n, s));
            }
        }
    }
    let cases = inst
        .into_par_iter()
        .flat_map_iter(|(k, n, s)| {
            let h = space_barrier(n, k, s).expect("s k < n");
            let id = format!("space k={k} n={n} s={s}");
            [
                solver_case(format!("{id} reaches s"), &h, s, true, budget),
                solver_case(format!("{id} misses s+1"), &h, s + 1, false, budget),
            ]
        })
        .collect();
    VerifyReport::new("space-barriers", cases, Vec::new())
}

/// The class formula for the minimum d-degree equals enumeration on every
/// divisibility barrier with `k <= kmax`, `n <= nmax`, for all `d`.
pub fn degree_formula_cases(kmax: usize, nmax: usize) -> VerifyReport {
    let cases = divisibility_instances(kmax, nmax)
        .into_par_iter()
        .flat_map_iter(|(k, ell, j, n, n1)| {
            let (h, _) = divisibility_barrier(n, k, ell, j, n1).expect("admissible instance");
            (1..k)
                .map(|d| {
                    let id = format!("degree k={k} ell={ell} j={j} n={n} n1={n1} d={d}");
                    let formula = finite_min_degree(n, k, d, ell, j, n1).expect("valid instance").value;
                    let enumerated = h.min_degree(d).expect("1 <= d < k").value;
                    let pass = formula == enumerated.into();
                    VerifyCase::new(id, enumerated, formula, pass)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    VerifyReport::new("degree-formulas", cases, Vec::new())
}

/// All bound checks on `g(k, d, l)` for `2 <= k <= kmax`, `1 <= d, l <= k-1`.
pub fn bound_cases(kmax: usize) -> VerifyReport {
    let mut inst = Vec::new();
    for k in 2..=kmax {
        for d in 1..k {
            for ell in 1..k {
                inst.push((k, d, ell));
            }
        }
    }
    let cases = inst
        .into_par_iter()
        .flat_map_iter(|(k, d, ell)| {
            let g = g_optimize(k, d, ell).expect("valid parameters").g;
            let report = g_bounds_check(k, d, ell, g).expect("valid parameters");
            report
                .checks
                .into_iter()
                .map(|c| {
                    let id = format!("bound k={k} d={d} ell={ell} {}", c.name);
                    VerifyCase::new(id, format!("{} vs {}", c.lhs, c.rhs), format!("slack {}", c.slack), c.holds)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    VerifyReport::new("bounds", cases, Vec::new())
}

/// `min_i C_i = floor(2^N / 3)` in exact integers for `2 <= N <= nmax`.
pub fn half_point_cases(nmax: usize) -> VerifyReport {
    let cases = (2..=nmax)
        .map(|big_n| {
            let c = half_point_exact(big_n + 1, 1).expect("N <= 62");
            let min = *c.iter().min().expect("three classes");
            let want = (1u64 << big_n) / 3;
            VerifyCase::new(format!("half-point N={big_n}"), want, min, min == want)
        })
        .collect();
    VerifyReport::new("half-point", cases, Vec::new())
}

/// A d-set of the barrier with no edge through it, found from the class
/// formula and confirmed by enumerating every (k-d)-completion.
pub fn zero_degree_witness(n: usize, k: usize, d: usize, ell: usize, j: usize, n1: usize) -> Option<Vec<u32>> {
    let fd = finite_min_degree(n, k, d, ell, j, n1).ok()?;
    let t = fd.per_t.iter().position(|v| v.as_ref().is_some_and(|v| *v == 0u32.into()))?;
    let mut s: Vec<u32> = (0..t as u32).collect();
    s.extend((n1 as u32..).take(d - t));
    let rest: Vec<u32> = (0..n as u32).filter(|v| !s.contains(v)).collect();
    let m = ell + 2;
    let mut through = 0u64;
    for_each_combination(rest.len(), k - d, |c| {
        let in_v1 = t + c.iter().filter(|&&i| (rest[i as usize] as usize) < n1).count();
        if in_v1 % m == j {
            through += 1;
        }
    });
    (through == 0).then_some(s)
}

/// For `k <= kmax` and `d >= max{k-l, floor(k/2)+1}`: `g = 0`, and every
/// admissible barrier with `n = 3k + l` has a zero-degree d-set.
pub fn zero_cases(kmax: usize) -> VerifyReport {
    let mut inst = Vec::new();
    for k in 3..=kmax {
        for d in 1..k {
            for ell in (1..k).filter(|&ell| g_zero_predicate(k, d, ell)) {
                inst.push((k, d, ell));
            }
        }
    }
    let parts: Vec<(Vec<VerifyCase>, Vec<String>)> = inst
        .into_par_iter()
        .map(|(k, d, ell)| {
            let mut cases = Vec::new();
            let mut notes = Vec::new();
            let g = g_optimize(k, d, ell).expect("valid parameters").g;
            cases.push(VerifyCase::new(format!("zero g k={k} d={d} ell={ell}"), 0, g, g.abs() <= 1e-9));
            let n = 3 * k + ell;
            for j in 0..ell + 2 {
                for n1 in admissible_first_part_sizes(n, k, ell, j).unwrap_or_default() {
                    let id = format!("zero witness k={k} d={d} ell={ell} j={j} n={n} n1={n1}");
                    if n1 < d || n - n1 < d {
                        notes.push(format!("{id}: skipped, a part has fewer than d vertices"));
                        continue;
                    }
                    let w = zero_degree_witness(n, k, d, ell, j, n1);
                    let got = w.as_ref().map_or("none".to_string(), |s| format!("{s:?}"));
                    cases.push(VerifyCase::new(id, "zero-degree d-set", got, w.is_some()));
                }
            }
            (cases, notes)
        })
        .collect();
    let (cases, notes): (Vec<_>, Vec<_>) = parts.into_iter().unzip();
    VerifyReport::new("zero", cases.concat(), notes.concat())
}

fn unit_diff(r: usize, i: usize, j: usize) -> IndexVector {
    let mut v = vec![0; r];
    v[i] = 1;
    v[j] = -1;
    v
}

const BRUTE_RADIUS: i64 = 4;
const CLOSURE_BOX: i64 = 12;
const BRUTE_T_MAX: u64 = 8;

/// Points of `[-b, b]^r` reachable from the origin by adding or
/// subtracting generators without leaving the box.
fn box_closure(r: usize, gens: &[IndexVector], b: i64) -> HashSet<IndexVector> {
    let mut seen: HashSet<IndexVector> = HashSet::new();
    let mut queue = VecDeque::from([vec![0i64; r]]);
    seen.insert(vec![0; r]);
    while let Some(p) = queue.pop_front() {
        for g in gens {
            for sign in [1, -1] {
                let q: IndexVector = p.iter().zip(g).map(|(x, y)| x + sign * y).collect();
                if q.iter().all(|x| x.abs() <= b) && seen.insert(q.clone()) {
                    queue.push_back(q);
                }
            }
        }
    }
    seen
}

// every point of [-2, 2]^r
fn small_box(r: usize) -> Vec<IndexVector> {
    let mut out = Vec::new();
    let mut v = vec![-2i64; r];
    loop {
        out.push(v.clone());
        let Some(p) = v.iter().position(|&x| x < 2) else { break };
        v[p] += 1;
        for x in &mut v[..p] {
            *x = -2;
        }
    }
    out
}

/// Compares membership on `[-2, 2]^r`, transferrals, and (for `r = 2`) the
/// minimal symmetric `t` with two oracles: radius-4 coefficient enumeration
/// (every hit must be a member) and the box closure (must agree exactly).
fn lattice_agreement(id: &str, r: usize, gens: &[IndexVector]) -> Vec<VerifyCase> {
    let mut cases = Vec::new();
    let l = match IntegerLattice::new(r, gens) {
        Ok(l) => l,
        Err(e) => return vec![VerifyCase::new(format!("{id} build"), "lattice", e, false)],
    };
    let closure = box_closure(r, gens, CLOSURE_BOX);
    let brute = |v: &[i64]| closure.contains(v);
    let mut unsound = Vec::new();
    let mut mismatches = Vec::new();
    for v in small_box(r) {
        let member = l.contains(&v);
        if brute_force_contains(gens, &v, BRUTE_RADIUS) && !member {
            unsound.push(v.clone());
        }
        if member != brute(&v) {
            mismatches.push(v);
        }
    }
    cases.push(VerifyCase::new(format!("{id} radius-4 combinations are members"), "[]", format!("{unsound:?}"), unsound.is_empty()));
    cases.push(VerifyCase::new(format!("{id} membership"), "[]", format!("{mismatches:?}"), mismatches.is_empty()));
    let brute_t: Vec<(usize, usize)> =
        (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).filter(|&(i, j)| brute(&unit_diff(r, i, j))).collect();
    let got = l.transferrals();
    cases.push(VerifyCase::new(format!("{id} transferrals"), format!("{brute_t:?}"), format!("{got:?}"), got == brute_t));
    if r == 2 {
        let want = (1..=BRUTE_T_MAX).find(|&t| brute(&[t as i64, -(t as i64)]));
        let got = l.minimal_symmetric_t();
        let pass = match (&got, want) {
            (Ok(g), Some(b)) => *g == Some(b),
            (Ok(g), None) => g.is_none_or(|t| t > BRUTE_T_MAX),
            (Err(_), _) => false,
        };
        cases.push(VerifyCase::new(format!("{id} minimal t"), format!("{want:?}"), format!("{got:?}"), pass));
    }
    cases
}

/// Fixed instances: a transferral-free `r = 2` set containing `(2, -2)`,
/// and the `r = 3` set `{(1,1,1), (0,0,3)}` against brute force.
pub fn lattice_claim_cases() -> VerifyReport {
    let mut cases = Vec::new();
    let two = vec![vec![1, 2], vec![3, 0]];
    let l = IntegerLattice::new(2, &two).expect("valid generators");
    cases.push(VerifyCase::new("claim r=2 transferral-free".into(), "None", format!("{:?}", l.find_transferral()), l.find_transferral().is_none()));
    cases.push(VerifyCase::new("claim r=2 (2,-2) in L".into(), true, l.contains(&[2, -2]), l.contains(&[2, -2])));
    cases.extend(lattice_agreement("claim r=2", 2, &two));
    let three = vec![vec![1, 1, 1], vec![0, 0, 3]];
    let l3 = IntegerLattice::new(3, &three).expect("valid generators");
    for v in [[1, 1, -2], [-2, 1, 1], [1, -2, 1]] {
        let want = brute_force_contains(&three, &v, BRUTE_RADIUS);
        let got = l3.contains(&v);
        cases.push(VerifyCase::new(format!("claim r=3 {v:?}"), want, got, want == got));
    }
    cases.extend(lattice_agreement("claim r=3", 3, &three));
    VerifyReport::new("lattice-claims", cases, Vec::new())
}

/// `samples` seeded generator sets shaped like robust edge-vectors: with
/// `r <= 3` and `2 <= k <= 4`, one to four distinct members of
/// `s_vectors(r, k)`. Compared with brute force.
pub fn lattice_random_cases(seed: u64, samples: usize) -> VerifyReport {
    let sets: Vec<(usize, Vec<IndexVector>)> = (0..samples)
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let r = rng.gen_range(1..=3);
            let k = rng.gen_range(2..=4);
            let pool = s_vectors(r, k);
            let g = rng.gen_range(1..=4.min(pool.len()));
            let mut gens: Vec<IndexVector> = pool.choose_multiple(&mut rng, g).cloned().collect();
            gens.sort();
            (r, gens)
        })
        .collect();
    let cases = sets
        .into_par_iter()
        .enumerate()
        .flat_map_iter(|(s, (r, gens))| lattice_agreement(&format!("random #{s} r={r} {gens:?}"), r, &gens))
        .collect();
    VerifyReport::new("lattice-random", cases, Vec::new())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in [Suite::Barriers, Suite::DegreeFormulas, Suite::Bounds, Suite::LatticeRegressions] {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn status_and_exit_codes() {
        let ok = VerifyCase::new("a".into(), 1, 1, true);
        let bad = VerifyCase::new("b".into(), 1, 2, false);
        let open = VerifyCase { undecided: true, ..VerifyCase::new("c".into(), 1, "?", false) };
        assert_eq!(VerifyReport::new("s", vec![ok.clone()], vec![]).exit_code(), 0);
        assert_eq!(VerifyReport::new("s", vec![ok.clone(), open.clone()], vec![]).exit_code(), 3);
        assert_eq!(VerifyReport::new("s", vec![ok, open, bad], vec![]).exit_code(), 1);
        assert_eq!(VerifyReport::new("s", vec![], vec![]).status, VerifyStatus::Pass);
    }

    #[test]
    fn small_suites_pass() {
        let limits = VerifyLimits { kmax: 3, nmax: 10, ..Default::default() };
        for s in [Suite::Barriers, Suite::DegreeFormulas, Suite::LatticeRegressions] {
            let r = run_suite(s, &VerifyLimits { samples: 30, ..limits });
            assert_eq!(r.status, VerifyStatus::Pass, "{}", r.to_text());
            assert!(!r.cases.is_empty());
        }
        let r = run_suite(Suite::Bounds, &VerifyLimits { kmax: 6, ..limits });
        assert_eq!(r.status, VerifyStatus::Pass, "{}", r.to_text());
    }

    #[test]
    fn tiny_budget_is_undecided() {
        let r = divisibility_barrier_cases(4, 14, 1);
        assert!(r.cases.iter().any(|c| c.undecided));
        assert_ne!(r.exit_code(), 0);
    }

    #[test]
    fn zero_witness_is_real() {
        // k = 5, d = 3, l = 2: g = 0
        let w = zero_degree_witness(17, 5, 3, 2, 0, admissible_first_part_sizes(17, 5, 2, 0).unwrap()[1]);
        assert!(w.is_some());
        // a case with positive minimum degree has no witness
        let n1 = admissible_first_part_sizes(13, 3, 1, 0)
            .unwrap()
            .into_iter()
            .find(|&n1| finite_min_degree(13, 3, 1, 1, 0, n1).unwrap().value > 0u32.into())
            .unwrap();
        assert!(zero_degree_witness(13, 3, 1, 1, 0, n1).is_none());
    }
}
