//! Small combinatorial helpers: binomials, in-place combination stepping,
//! colex ranking.

use num_bigint::BigUint;
use num_traits::One;

/// `C(n, k)` as `u64`, or `None` on overflow.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) is exact at every step
        acc = acc.checked_mul((n - i) as u128)? / (i as u128 + 1);
        if acc > u64::MAX as u128 {
            return None;
        }
    }
    Some(acc as u64)
}

/// `C(n, k)` saturating at `u64::MAX`.
pub fn binomial_sat(n: u64, k: u64) -> u64 {
    binomial(n, k).unwrap_or(u64::MAX)
}

/// Exact `C(n, k)` for arbitrary sizes. Negative-free: `k > n` gives 0.
pub fn binomial_big(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// `C(n, k)` as `f64`, for densities.
pub fn binomial_f64(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Advance `comb` (strictly increasing, values in `0..n`) to the next
/// combination in lexicographic order. Returns `false` after the last one.
pub fn next_combination(comb: &mut [u32], n: u32) -> bool {
    let k = comb.len();
    if k == 0 {
        return false;
    }
    let mut i = k;
    while i > 0 {
        i -= 1;
        if comb[i] < n - (k - i) as u32 {
            comb[i] += 1;
            for j in i + 1..k {
                comb[j] = comb[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Calls `f` on every `k`-subset of `0..n`, in lexicographic order.
pub fn for_each_combination<F: FnMut(&[u32])>(n: usize, k: usize, mut f: F) {
    if k > n {
        return;
    }
    let mut comb: Vec<u32> = (0..k as u32).collect();
    loop {
        f(&comb);
        if !next_combination(&mut comb, n as u32) {
            break;
        }
    }
}

/// Calls `f` on every `k`-subset of `items` (which should be sorted for
/// lexicographic output), as a freshly mapped slice.
pub fn for_each_subset_of<F: FnMut(&[u32])>(items: &[u32], k: usize, mut f: F) {
    let mut buf = vec![0u32; k];
    for_each_combination(items.len(), k, |idx| {
        for (b, &i) in buf.iter_mut().zip(idx) {
            *b = items[i as usize];
        }
        f(&buf);
    });
}

/// Pascal table used for colex ranking of `k`-subsets of `0..n`.
#[derive(Debug, Clone)]
pub struct RankTable {
    k: usize,
    // table[j][v] = C(v, j + 1)
    table: Vec<Vec<u64>>,
}

impl RankTable {
    pub fn new(n: usize, k: usize) -> Self {
        let table = (0..k)
            .map(|j| (0..=n).map(|v| binomial_sat(v as u64, j as u64 + 1)).collect())
            .collect();
        RankTable { k, table }
    }

    /// Colex rank of a sorted `k`-subset; a bijection onto `0..C(n, k)`.
    pub fn rank(&self, sorted: &[u32]) -> u64 {
        debug_assert_eq!(sorted.len(), self.k);
        sorted
            .iter()
            .enumerate()
            .map(|(j, &v)| self.table[j][v as usize])
            .sum()
    }
}
