//! Vertex partitions, index vectors, and exact integer lattices generated
//! by robust edge-vectors.
//!
//! Part coordinates are 0-based: coordinate `c` of an index vector counts
//! intersections with `parts()[c]`. The trash part `V0` has no coordinate.

use crate::hgraph::Hypergraph;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

/// Integer vector indexed by non-trash parts.
pub type IndexVector = Vec<i64>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("vertex {vertex} appears in more than one part")]
    Overlap { vertex: u32 },
    #[error("vertex {vertex} outside 0..{n}")]
    OutOfRange { vertex: u32, n: usize },
    #[error("vertex {vertex} is in no part")]
    Uncovered { vertex: u32 },
    #[error("part {index} is empty")]
    EmptyPart { index: usize },
    #[error("vector {vector:?} has dimension {got}, expected {expected}")]
    Dimension { vector: IndexVector, got: usize, expected: usize },
    #[error("operation needs r = {expected}, lattice has r = {got}")]
    WrongRank { expected: usize, got: usize },
    #[error("canonical basis entry does not fit in 64 bits")]
    Overflow,
    #[error("{vector:?} has no representation with coefficients bounded by {bound}")]
    NotRepresentable { vector: IndexVector, bound: u64 },
}

/// `V0, V1, .., Vr` covering `0..n`. Parts are stored sorted; `V0` may be
/// empty, the others may not.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PartitionRepr", into = "PartitionRepr")]
pub struct VertexPartition {
    n: usize,
    trash: Vec<u32>,
    parts: Vec<Vec<u32>>,
    // part index per vertex, None for trash
    label: Vec<Option<u32>>,
}

#[derive(Serialize, Deserialize)]
struct PartitionRepr {
    #[serde(default)]
    n: Option<usize>,
    #[serde(rename = "V0", default)]
    v0: Vec<u32>,
    #[serde(alias = "partition")]
    parts: Vec<Vec<u32>>,
}

impl TryFrom<PartitionRepr> for VertexPartition {
    type Error = LatticeError;
    fn try_from(r: PartitionRepr) -> Result<Self, LatticeError> {
        let n = r.n.unwrap_or(r.v0.len() + r.parts.iter().map(Vec::len).sum::<usize>());
        VertexPartition::new(n, r.v0, r.parts)
    }
}

impl From<VertexPartition> for PartitionRepr {
    fn from(p: VertexPartition) -> Self {
        PartitionRepr { n: Some(p.n), v0: p.trash, parts: p.parts }
    }
}

impl VertexPartition {
    pub fn new(n: usize, trash: Vec<u32>, parts: Vec<Vec<u32>>) -> Result<Self, LatticeError> {
        let mut label: Vec<Option<Option<u32>>> = vec![None; n];
        let mut place = |v: u32, tag: Option<u32>| -> Result<(), LatticeError> {
            let slot = label.get_mut(v as usize).ok_or(LatticeError::OutOfRange { vertex: v, n })?;
            if slot.is_some() {
                return Err(LatticeError::Overlap { vertex: v });
            }
            *slot = Some(tag);
            Ok(())
        };
        for &v in &trash {
            place(v, None)?;
        }
        for (i, part) in parts.iter().enumerate() {
            if part.is_empty() {
                return Err(LatticeError::EmptyPart { index: i });
            }
            for &v in part {
                place(v, Some(i as u32))?;
            }
        }
        let label = label
            .into_iter()
            .enumerate()
            .map(|(v, l)| l.ok_or(LatticeError::Uncovered { vertex: v as u32 }))
            .collect::<Result<Vec<_>, _>>()?;
        let mut trash = trash;
        trash.sort_unstable();
        let parts = parts
            .into_iter()
            .map(|mut p| {
                p.sort_unstable();
                p
            })
            .collect();
        Ok(VertexPartition { n, trash, parts, label })
    }

    /// Single part holding every vertex.
    pub fn trivial(n: usize) -> Self {
        VertexPartition::new(n, Vec::new(), vec![(0..n as u32).collect()]).expect("trivial partition is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of non-trash parts.
    pub fn r(&self) -> usize {
        self.parts.len()
    }

    pub fn trash(&self) -> &[u32] {
        &self.trash
    }

    pub fn parts(&self) -> &[Vec<u32>] {
        &self.parts
    }

    /// Part index of `v`, or `None` for trash.
    pub fn part_of(&self, v: u32) -> Option<usize> {
        self.label[v as usize].map(|i| i as usize)
    }

    /// Merges part `j` into part `i` (`i != j`); the merged part takes the
    /// smaller index and later parts shift down.
    pub fn merge(&self, i: usize, j: usize) -> Self {
        let (a, b) = (i.min(j), i.max(j));
        let mut parts = self.parts.clone();
        let moved = parts.remove(b);
        parts[a].extend(moved);
        VertexPartition::new(self.n, self.trash.clone(), parts).expect("merging keeps a valid partition")
    }

    /// `i_P(S)`: intersection sizes with each non-trash part.
    pub fn index_vector(&self, set: &[u32]) -> IndexVector {
        let mut v = vec![0i64; self.r()];
        for &x in set {
            if let Some(i) = self.part_of(x) {
                v[i] += 1;
            }
        }
        v
    }

    /// True when `set` avoids `V0`.
    pub fn avoids_trash(&self, set: &[u32]) -> bool {
        set.iter().all(|&x| self.part_of(x).is_some())
    }
}

/// Unit vector `u_i` in dimension `r`.
pub fn unit(r: usize, i: usize) -> IndexVector {
    let mut v = vec![0; r];
    v[i] = 1;
    v
}

/// All non-negative vectors of dimension `r` with coordinate sum `s`, in
/// lexicographically decreasing order.
pub fn s_vectors(r: usize, s: usize) -> Vec<IndexVector> {
    fn rec(r: usize, s: usize, prefix: &mut Vec<i64>, out: &mut Vec<IndexVector>) {
        if prefix.len() + 1 == r {
            prefix.push(s as i64);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for first in (0..=s).rev() {
            prefix.push(first as i64);
            rec(r, s - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if r > 0 {
        rec(r, s, &mut Vec::new(), &mut out);
    }
    out
}

/// Number of edges avoiding `V0` per index vector.
pub fn edge_vector_counts(h: &Hypergraph, p: &VertexPartition) -> BTreeMap<IndexVector, u64> {
    let mut counts = BTreeMap::new();
    for e in h.edges() {
        if p.avoids_trash(e) {
            *counts.entry(p.index_vector(e)).or_insert(0) += 1;
        }
    }
    counts
}

/// Index vectors realized by at least `tau` edges that avoid `V0`, sorted.
pub fn robust_vectors(h: &Hypergraph, p: &VertexPartition, tau: u64) -> Vec<IndexVector> {
    edge_vector_counts(h, p).into_iter().filter(|&(_, c)| c >= tau).map(|(v, _)| v).collect()
}

/// Subgroup of `Z^r` with its Hermite normal form basis: rows are in
/// echelon form, pivots are positive, and entries above each pivot lie in
/// `[0, pivot)`. This form is unique, so equal lattices compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntegerLattice {
    r: usize,
    basis: Vec<IndexVector>,
    generators: Vec<IndexVector>,
}

fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

fn hnf(r: usize, rows: &[IndexVector]) -> Result<Vec<IndexVector>, LatticeError> {
    let mut m: Vec<Vec<BigInt>> = rows.iter().map(|v| to_big(v)).collect();
    let mut out_rows = 0;
    let mut pivots = Vec::new();
    for col in 0..r {
        // gcd elimination on rows out_rows.. in this column
        loop {
            let pivot = (out_rows..m.len())
                .filter(|&i| !m[i][col].is_zero())
                .min_by(|&a, &b| m[a][col].abs().cmp(&m[b][col].abs()).then(a.cmp(&b)));
            let Some(p) = pivot else { break };
            m.swap(out_rows, p);
            let mut done = true;
            for i in out_rows + 1..m.len() {
                if m[i][col].is_zero() {
                    continue;
                }
                let q = m[i][col].div_floor(&m[out_rows][col]);
                for c in col..r {
                    let sub = &q * &m[out_rows][c];
                    m[i][c] -= sub;
                }
                if !m[i][col].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if out_rows < m.len() && !m[out_rows][col].is_zero() {
            if m[out_rows][col].is_negative() {
                for c in col..r {
                    m[out_rows][c] = -m[out_rows][c].clone();
                }
            }
            pivots.push(col);
            out_rows += 1;
        }
    }
    m.truncate(out_rows);
    // reduce entries above each pivot into [0, pivot)
    for (row, &col) in pivots.iter().enumerate() {
        for above in 0..row {
            let q = m[above][col].div_floor(&m[row][col]);
            if q.is_zero() {
                continue;
            }
            for c in col..r {
                let sub = &q * &m[row][c];
                m[above][c] -= sub;
            }
        }
    }
    m.into_iter()
        .map(|row| row.iter().map(|x| x.to_i64().ok_or(LatticeError::Overflow)).collect())
        .collect()
}

fn check_dims(r: usize, vs: &[IndexVector]) -> Result<(), LatticeError> {
    match vs.iter().find(|v| v.len() != r) {
        Some(v) => Err(LatticeError::Dimension { vector: v.clone(), got: v.len(), expected: r }),
        None => Ok(()),
    }
}

impl IntegerLattice {
    /// Lattice generated by `generators` in `Z^r`.
    pub fn new(r: usize, generators: &[IndexVector]) -> Result<Self, LatticeError> {
        check_dims(r, generators)?;
        let basis = hnf(r, generators)?;
        Ok(IntegerLattice { r, basis, generators: generators.to_vec() })
    }

    pub fn zero(r: usize) -> Self {
        IntegerLattice { r, basis: Vec::new(), generators: Vec::new() }
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn basis(&self) -> &[IndexVector] {
        &self.basis
    }

    pub fn generators(&self) -> &[IndexVector] {
        &self.generators
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Exact membership by back-substitution on the canonical basis.
    pub fn contains(&self, v: &[i64]) -> bool {
        if v.len() != self.r {
            return false;
        }
        let mut rest = to_big(v);
        for row in &self.basis {
            let col = row.iter().position(|&x| x != 0).expect("basis rows are nonzero");
            if rest[..col].iter().any(|x| !x.is_zero()) {
                return false;
            }
            let pivot = BigInt::from(row[col]);
            let (q, rem) = rest[col].div_rem(&pivot);
            if !rem.is_zero() {
                return false;
            }
            for c in col..self.r {
                rest[c] -= &q * BigInt::from(row[c]);
            }
        }
        rest.iter().all(Zero::is_zero)
    }

    /// First pair `i < j` (lexicographic scan) with `u_i - u_j` in the lattice.
    pub fn find_transferral(&self) -> Option<(usize, usize)> {
        self.transferrals().into_iter().next()
    }

    /// Every pair `i < j` with `u_i - u_j` in the lattice, in scan order.
    pub fn transferrals(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.r {
            for j in i + 1..self.r {
                let mut v = vec![0; self.r];
                v[i] = 1;
                v[j] = -1;
                if self.contains(&v) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Smallest `t >= 1` with `(t, -t)` in the lattice, for `r = 2`.
    pub fn minimal_symmetric_t(&self) -> Result<Option<u64>, LatticeError> {
        if self.r != 2 {
            return Err(LatticeError::WrongRank { expected: 2, got: self.r });
        }
        // the valid t form a subgroup tZ; bound its generator
        let bound = match self.basis.as_slice() {
            [a, b] => (a[0] * b[1]).unsigned_abs(),
            [a] if a[0] != 0 && a[1] == -a[0] => a[0].unsigned_abs(),
            _ => return Ok(None),
        };
        Ok((1..=bound).find(|&t| self.contains(&[t as i64, -(t as i64)])))
    }

    /// Smallest `i` with `i_P(U) - u_i` in the lattice.
    pub fn find_absorbable_index(&self, u: &[u32], p: &VertexPartition) -> Option<usize> {
        let iv = p.index_vector(u);
        (0..self.r).find(|&i| {
            let mut v = iv.clone();
            v[i] -= 1;
            self.contains(&v)
        })
    }
}

/// Whether `v` is a combination of `generators` with every coefficient in
/// `[-radius, radius]`, by plain enumeration. Oracle for small cases.
pub fn brute_force_contains(generators: &[IndexVector], v: &[i64], radius: i64) -> bool {
    fn rec(p: usize, acc: &mut Vec<i64>, gens: &[IndexVector], v: &[i64], rad: i64) -> bool {
        if p == gens.len() {
            return acc == v;
        }
        for a in -rad..=rad {
            for (x, g) in acc.iter_mut().zip(&gens[p]) {
                *x += a * g;
            }
            let hit = rec(p + 1, acc, gens, v, rad);
            for (x, g) in acc.iter_mut().zip(&gens[p]) {
                *x -= a * g;
            }
            if hit {
                return true;
            }
        }
        false
    }
    rec(0, &mut vec![0; v.len()], generators, v, radius)
}

/// Integer combination of generators with coefficients bounded by the
/// search radius, split into its positive part `b` and negative part `c`
/// so that `v = sum b_i g_i - sum c_i g_i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub coefficients: Vec<i64>,
    pub b: Vec<u64>,
    pub c: Vec<u64>,
}

/// Largest coefficient radius searched before giving up.
pub const MAX_COEFFICIENT_RADIUS: u64 = 64;

// Depth-first search for coefficients in [-radius, radius]; prunes when the
// residual cannot be cancelled by the remaining generators.
fn search_box(target: &[i64], gens: &[IndexVector], radius: i64) -> Option<Vec<i64>> {
    let r = target.len();
    // slack[p][c] = sum_{q >= p} |g_q[c]|
    let mut slack = vec![vec![0i64; r]; gens.len() + 1];
    for p in (0..gens.len()).rev() {
        for c in 0..r {
            slack[p][c] = slack[p + 1][c] + gens[p][c].abs();
        }
    }
    fn rec(
        p: usize,
        residual: &mut Vec<i64>,
        gens: &[IndexVector],
        slack: &[Vec<i64>],
        radius: i64,
        coeffs: &mut Vec<i64>,
    ) -> bool {
        if (0..residual.len()).any(|c| residual[c].abs() > radius * slack[p][c]) {
            return false;
        }
        if p == gens.len() {
            return residual.iter().all(|&x| x == 0);
        }
        // smaller |a| first, negative before positive
        for mag in 0..=radius {
            for a in if mag == 0 { vec![0] } else { vec![-mag, mag] } {
                for (x, g) in residual.iter_mut().zip(&gens[p]) {
                    *x -= a * g;
                }
                coeffs.push(a);
                if rec(p + 1, residual, gens, slack, radius, coeffs) {
                    return true;
                }
                coeffs.pop();
                for (x, g) in residual.iter_mut().zip(&gens[p]) {
                    *x += a * g;
                }
            }
        }
        false
    }
    let mut residual = target.to_vec();
    let mut coeffs = Vec::with_capacity(gens.len());
    rec(0, &mut residual, gens, &slack, radius, &mut coeffs).then_some(coeffs)
}

/// Writes `v` over `generators` with the smallest possible max-norm of
/// coefficients, searching radii up to `bound`.
pub fn decompose_vector(v: &[i64], generators: &[IndexVector], bound: u64) -> Result<Decomposition, LatticeError> {
    check_dims(v.len(), generators)?;
    for radius in 0..=bound.min(MAX_COEFFICIENT_RADIUS) {
        if let Some(coefficients) = search_box(v, generators, radius as i64) {
            let b = coefficients.iter().map(|&a| a.max(0) as u64).collect();
            let c = coefficients.iter().map(|&a| (-a).max(0) as u64).collect();
            return Ok(Decomposition { coefficients, b, c });
        }
    }
    Err(LatticeError::NotRepresentable { vector: v.to_vec(), bound: bound.min(MAX_COEFFICIENT_RADIUS) })
}

/// Max over `targets` of the least coefficient radius needed to write each
/// target over `generators`.
pub fn coefficient_bound(generators: &[IndexVector], targets: &[IndexVector]) -> Result<u64, LatticeError> {
    let mut worst = 0;
    for t in targets {
        let d = decompose_vector(t, generators, MAX_COEFFICIENT_RADIUS)?;
        worst = worst.max(d.coefficients.iter().map(|a| a.unsigned_abs()).max().unwrap_or(0));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lat(gens: &[&[i64]]) -> IntegerLattice {
        let r = gens.first().map_or(2, |g| g.len());
        IntegerLattice::new(r, &gens.iter().map(|g| g.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn index_vectors() {
        let p = VertexPartition::new(6, vec![0], vec![vec![1, 2, 3], vec![4, 5]]).unwrap();
        assert_eq!(p.index_vector(&[1, 4, 5]), vec![1, 2]);
        assert_eq!(p.index_vector(&[0]), vec![0, 0]);
        assert_eq!(p.index_vector(&[1, 2, 3]), vec![3, 0]);
    }

    #[test]
    fn partition_validation_and_json() {
        assert!(matches!(VertexPartition::new(3, vec![], vec![vec![0, 1]]), Err(LatticeError::Uncovered { vertex: 2 })));
        assert!(matches!(VertexPartition::new(3, vec![0], vec![vec![0, 1, 2]]), Err(LatticeError::Overlap { .. })));
        assert!(matches!(VertexPartition::new(2, vec![], vec![vec![0, 1], vec![]]), Err(LatticeError::EmptyPart { .. })));
        let p: VertexPartition = serde_json::from_str(r#"{"partition": [[2, 0], [1]]}"#).unwrap();
        assert_eq!(p.parts(), &[vec![0, 2], vec![1]]);
        let back: VertexPartition = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        assert_eq!(back, p);
        assert_eq!(p.merge(0, 1).parts(), &[vec![0, 1, 2]]);
    }

    #[test]
    fn robust_vectors_examples() {
        let h = Hypergraph::complete(6, 3).unwrap();
        let p = VertexPartition::new(6, vec![], vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let rv = robust_vectors(&h, &p, 1);
        assert_eq!(rv, vec![vec![0, 3], vec![1, 2], vec![2, 1], vec![3, 0]]);
        assert!(robust_vectors(&h, &p, 21).is_empty());
    }

    #[test]
    fn hnf_examples() {
        assert_eq!(lat(&[&[1, 2], &[3, 0]]).basis(), &[vec![1, 2], vec![0, 6]]);
        assert_eq!(IntegerLattice::new(2, &[]).unwrap().basis().len(), 0);
        assert_eq!(lat(&[&[1, 0], &[0, 1]]).basis(), &[vec![1, 0], vec![0, 1]]);
        assert_eq!(lat(&[&[0, -3], &[0, 6]]).basis(), &[vec![0, 3]]);
    }

    #[test]
    fn membership_examples() {
        let l = lat(&[&[1, 2], &[3, 0]]);
        assert!(l.contains(&[2, -2]));
        assert!(!l.contains(&[1, -1]));
        assert!(l.contains(&[0, 0]));
        assert!(IntegerLattice::zero(3).contains(&[0, 0, 0]));
        assert!(!IntegerLattice::zero(3).contains(&[0, 1, 0]));
    }

    #[test]
    fn transferral_examples() {
        assert_eq!(lat(&[&[1, 2], &[2, 1]]).find_transferral(), Some((0, 1)));
        assert_eq!(lat(&[&[1, 2], &[3, 0]]).find_transferral(), None);
        assert_eq!(lat(&[&[3]]).find_transferral(), None);
    }

    #[test]
    fn minimal_t_examples() {
        assert_eq!(lat(&[&[1, 2], &[2, 1]]).minimal_symmetric_t().unwrap(), Some(1));
        assert_eq!(lat(&[&[1, 2], &[3, 0]]).minimal_symmetric_t().unwrap(), Some(2));
        assert_eq!(lat(&[&[0, 3], &[3, 0]]).minimal_symmetric_t().unwrap(), Some(3));
        assert_eq!(lat(&[&[2, -2]]).minimal_symmetric_t().unwrap(), Some(2));
        assert_eq!(lat(&[&[1, 2]]).minimal_symmetric_t().unwrap(), None);
        assert!(lat(&[&[1, 1, 1]]).minimal_symmetric_t().is_err());
    }

    #[test]
    fn coefficient_bound_examples() {
        let i = vec![vec![1, 2], vec![3, 0]];
        assert_eq!(coefficient_bound(&i, &[vec![2, -2]]).unwrap(), 1);
        assert_eq!(coefficient_bound(&[vec![3, 0], vec![0, 3]], &[vec![3, 3]]).unwrap(), 1);
        assert!(matches!(coefficient_bound(&i, &[vec![1, -1]]), Err(LatticeError::NotRepresentable { .. })));
    }

    #[test]
    fn decompose_examples() {
        let i = vec![vec![1, 2], vec![3, 0]];
        let d = decompose_vector(&[2, -2], &i, 1).unwrap();
        assert_eq!(d.coefficients, vec![-1, 1]);
        assert_eq!((d.b, d.c), (vec![0, 1], vec![1, 0]));
        assert_eq!(decompose_vector(&[0, 0], &i, 0).unwrap().coefficients, vec![0, 0]);
        assert!(decompose_vector(&[1, -1], &i, 5).is_err());
    }

    #[test]
    fn absorbable_index_examples() {
        let p = VertexPartition::new(6, vec![], vec![vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
        let l = lat(&[&[1, 2], &[3, 0]]);
        assert_eq!(l.find_absorbable_index(&[0, 1, 3, 4], &p), Some(0));
        let p1 = VertexPartition::trivial(5);
        assert_eq!(lat(&[&[3]]).find_absorbable_index(&[0, 1, 2, 3], &p1), Some(0));
        assert_eq!(IntegerLattice::zero(2).find_absorbable_index(&[0, 3, 4], &p), None);
    }

    #[test]
    fn claim_regressions() {
        // transferral-free r = 2 set still contains (2, -2)
        let l = lat(&[&[1, 2], &[3, 0]]);
        assert!(l.find_transferral().is_none() && l.contains(&[2, -2]));
        let gens = vec![vec![1, 1, 1], vec![0, 0, 3]];
        let l3 = IntegerLattice::new(3, &gens).unwrap();
        for v in [[1, 1, -2], [-2, 1, 1], [1, -2, 1]] {
            assert_eq!(l3.contains(&v), brute_force_contains(&gens, &v, 4), "{v:?}");
        }
        assert!(l3.contains(&[1, 1, -2]));
    }

    #[test]
    fn s_vectors_enumerates() {
        assert_eq!(s_vectors(2, 3), vec![vec![3, 0], vec![2, 1], vec![1, 2], vec![0, 3]]);
        assert_eq!(s_vectors(3, 2).len(), 6);
    }

    fn gen_set() -> impl Strategy<Value = (usize, Vec<IndexVector>)> {
        (1usize..=3).prop_flat_map(|r| (Just(r), prop::collection::vec(prop::collection::vec(-4i64..=4, r), 0..=4)))
    }

    proptest! {
        #[test]
        fn contains_agrees_with_enumeration((r, gens) in gen_set(), v in prop::collection::vec(-3i64..=3, 3)) {
            let v = &v[..r];
            let l = IntegerLattice::new(r, &gens).unwrap();
            if brute_force_contains(&gens, v, 4) {
                prop_assert!(l.contains(v));
            }
            for g in &gens {
                prop_assert!(l.contains(g));
            }
            // every basis row is an integer combination of generators
            let again = IntegerLattice::new(r, l.basis()).unwrap();
            prop_assert_eq!(again.basis(), l.basis());
        }

        #[test]
        fn basis_is_order_invariant((r, gens) in gen_set(), seed: u64) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let mut shuffled = gens.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = IntegerLattice::new(r, &gens).unwrap();
            let b = IntegerLattice::new(r, &shuffled).unwrap();
            prop_assert_eq!(a.basis(), b.basis());
        }

        #[test]
        fn transferral_is_definitional((r, gens) in gen_set()) {
            let l = IntegerLattice::new(r, &gens).unwrap();
            let any = (0..r).any(|i| (i + 1..r).any(|j| {
                let mut v = vec![0; r];
                v[i] = 1;
                v[j] = -1;
                l.contains(&v)
            }));
            prop_assert_eq!(l.find_transferral().is_some(), any);
        }
    }
}
