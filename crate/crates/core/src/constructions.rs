//! Space and divisibility barriers.
//!
//! The space barrier `H(s)` takes every k-set meeting the spine
//! `{0, .., s-1}`. The divisibility barrier `H_l^j` puts `V1 = {0, .., n1-1}`
//! and takes every k-set `e` with `|e ∩ V1| ≡ j (mod l+2)`.

use crate::combin::next_combination;
use crate::hgraph::{Hypergraph, HypergraphError};
use crate::lattice::VertexPartition;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConstructionError {
    #[error(transparent)]
    Hypergraph(#[from] HypergraphError),
    #[error("spine size s = {s} violates s*k < n (n = {n}, k = {k})")]
    SpineTooLarge { n: usize, k: usize, s: usize },
    #[error("ell = {ell} outside 0..={max}")]
    EllOutOfRange { ell: usize, max: usize },
    #[error("n = {n} is not congruent to ell = {ell} mod k = {k}")]
    WrongResidue { n: usize, k: usize, ell: usize },
    #[error("j = {j} outside 0..={max}")]
    JOutOfRange { j: usize, max: usize },
    #[error("n1 = {n1} exceeds n = {n}")]
    FirstPartTooLarge { n1: usize, n: usize },
    #[error("n1 = {n1} is not congruent to floor(n/k)*j + ell + 1 = {required} mod {modulus}")]
    Inadmissible { n1: usize, required: usize, modulus: usize },
}

/// Parameters of a barrier construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BarrierSpec {
    Space { n: usize, k: usize, s: usize },
    Divisibility { n: usize, k: usize, ell: usize, j: usize, n1: usize },
}

impl BarrierSpec {
    pub fn validate(&self) -> Result<(), ConstructionError> {
        match *self {
            BarrierSpec::Space { n, k, s } => {
                Hypergraph::empty(n, k)?;
                if s * k >= n {
                    return Err(ConstructionError::SpineTooLarge { n, k, s });
                }
                Ok(())
            }
            BarrierSpec::Divisibility { n, k, ell, j, n1 } => {
                check_divisibility_params(n, k, ell, j)?;
                if n1 > n {
                    return Err(ConstructionError::FirstPartTooLarge { n1, n });
                }
                let modulus = ell + 2;
                let required = required_residue(n, k, ell, j);
                if n1 % modulus != required {
                    return Err(ConstructionError::Inadmissible { n1, required, modulus });
                }
                Ok(())
            }
        }
    }

    pub fn n(&self) -> usize {
        match *self {
            BarrierSpec::Space { n, .. } | BarrierSpec::Divisibility { n, .. } => n,
        }
    }

    pub fn k(&self) -> usize {
        match *self {
            BarrierSpec::Space { k, .. } | BarrierSpec::Divisibility { k, .. } => k,
        }
    }

    /// Generates the barrier; space barriers get the trivial partition.
    pub fn build(&self) -> Result<(Hypergraph, VertexPartition), ConstructionError> {
        match *self {
            BarrierSpec::Space { n, k, s } => Ok((space_barrier(n, k, s)?, VertexPartition::trivial(n))),
            BarrierSpec::Divisibility { n, k, ell, j, n1 } => divisibility_barrier(n, k, ell, j, n1),
        }
    }
}

fn check_divisibility_params(n: usize, k: usize, ell: usize, j: usize) -> Result<(), ConstructionError> {
    Hypergraph::empty(n, k)?;
    if ell >= k {
        return Err(ConstructionError::EllOutOfRange { ell, max: k - 1 });
    }
    if n % k != ell {
        return Err(ConstructionError::WrongResidue { n, k, ell });
    }
    if j > ell + 1 {
        return Err(ConstructionError::JOutOfRange { j, max: ell + 1 });
    }
    Ok(())
}

// floor(n/k)*j + ell + 1 reduced mod ell+2
fn required_residue(n: usize, k: usize, ell: usize, j: usize) -> usize {
    ((n / k) * j + ell + 1) % (ell + 2)
}

fn k_sets_where<F: Fn(&[u32]) -> bool>(n: usize, k: usize, keep: F) -> Hypergraph {
    let mut comb: Vec<u32> = (0..k as u32).collect();
    let mut edges = Vec::new();
    loop {
        if keep(&comb) {
            edges.push(comb.clone());
        }
        if !next_combination(&mut comb, n as u32) {
            break;
        }
    }
    Hypergraph::from_canonical_iter(n, k, edges)
}

/// All k-sets meeting `{0, .., s-1}`; requires `s*k < n`.
pub fn space_barrier(n: usize, k: usize, s: usize) -> Result<Hypergraph, ConstructionError> {
    BarrierSpec::Space { n, k, s }.validate()?;
    Ok(k_sets_where(n, k, |e| (e[0] as usize) < s))
}

/// All k-sets `e` with `|e ∩ V1| ≡ j (mod ell+2)`, where `V1` is the first
/// `n1` vertices. The partition lists the nonempty parts among `V1`, `V2`
/// with an empty trash part.
pub fn divisibility_barrier(
    n: usize,
    k: usize,
    ell: usize,
    j: usize,
    n1: usize,
) -> Result<(Hypergraph, VertexPartition), ConstructionError> {
    BarrierSpec::Divisibility { n, k, ell, j, n1 }.validate()?;
    let m = ell + 2;
    let h = k_sets_where(n, k, |e| e.iter().filter(|&&v| (v as usize) < n1).count() % m == j);
    let parts: Vec<Vec<u32>> =
        [(0..n1 as u32).collect::<Vec<_>>(), (n1 as u32..n as u32).collect()].into_iter().filter(|p| !p.is_empty()).collect();
    let partition = VertexPartition::new(n, Vec::new(), parts).expect("prefix split is a partition");
    Ok((h, partition))
}

/// Every `n1` in `0..=n` satisfying the admissibility congruence, ascending.
pub fn admissible_first_part_sizes(n: usize, k: usize, ell: usize, j: usize) -> Result<Vec<usize>, ConstructionError> {
    check_divisibility_params(n, k, ell, j)?;
    let m = ell + 2;
    let r = required_residue(n, k, ell, j);
    Ok((0..=n).filter(|n1| n1 % m == r).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::combin::{binomial, for_each_combination};
    use crate::hgraph::SolverOptions;

    #[test]
    fn space_barrier_examples() {
        let h = space_barrier(9, 3, 2).unwrap();
        assert_eq!(h.edge_count(), 49);
        assert_eq!(h.matching_number(&SolverOptions::default()).maximum(), Some(2));
        assert_eq!(space_barrier(9, 3, 0).unwrap().edge_count(), 0);
        assert!(matches!(space_barrier(9, 3, 3), Err(ConstructionError::SpineTooLarge { .. })));
        assert_eq!(h.degree(&[5]).unwrap(), 13);
        assert_eq!(h.min_degree(1).unwrap().value, 13);
    }

    #[test]
    fn divisibility_barrier_examples() {
        let (h, p) = divisibility_barrier(7, 3, 1, 0, 2).unwrap();
        assert_eq!(h.edge_count(), 10);
        assert!(h.edges().all(|e| e[0] >= 2));
        assert_eq!(h.matching_number(&SolverOptions::default()).maximum(), Some(1));
        assert_eq!(p.parts(), &[vec![0, 1], vec![2, 3, 4, 5, 6]]);
        assert_eq!(h.min_degree(2).unwrap().value, 0);

        let (h, _) = divisibility_barrier(8, 4, 0, 1, 3).unwrap();
        assert_eq!(h.matching_number(&SolverOptions::default()).maximum(), Some(1));

        let err = divisibility_barrier(7, 3, 1, 0, 3).unwrap_err();
        assert_eq!(err, ConstructionError::Inadmissible { n1: 3, required: 2, modulus: 3 });
        assert!(matches!(divisibility_barrier(8, 3, 1, 0, 2), Err(ConstructionError::WrongResidue { .. })));
        assert!(matches!(divisibility_barrier(7, 3, 1, 3, 2), Err(ConstructionError::JOutOfRange { .. })));
    }

    #[test]
    fn admissible_sizes() {
        assert_eq!(admissible_first_part_sizes(7, 3, 1, 0).unwrap(), vec![2, 5]);
        assert_eq!(admissible_first_part_sizes(8, 4, 0, 0).unwrap(), vec![1, 3, 5, 7]);
        for j in 0..=2 {
            assert!(!admissible_first_part_sizes(7, 3, 1, j).unwrap().is_empty());
        }
    }

    #[test]
    fn membership_is_sound() {
        for (n, k, ell) in [(7, 3, 1), (11, 4, 3), (10, 4, 2), (14, 3, 2)] {
            for j in 0..=ell + 1 {
                for n1 in admissible_first_part_sizes(n, k, ell, j).unwrap() {
                    let (h, _) = divisibility_barrier(n, k, ell, j, n1).unwrap();
                    let mut expected = 0;
                    for_each_combination(n, k, |e| {
                        let member = e.iter().filter(|&&v| (v as usize) < n1).count() % (ell + 2) == j;
                        assert_eq!(h.contains_edge(e), member);
                        expected += member as usize;
                    });
                    assert_eq!(h.edge_count(), expected);
                }
            }
        }
        let h = space_barrier(12, 3, 3).unwrap();
        assert_eq!(h.edge_count() as u64, binomial(12, 3).unwrap() - binomial(9, 3).unwrap());
    }
}
