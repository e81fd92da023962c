//! The threshold function `g(k, d, l)`, its bounds, the conjectured
//! minimum-degree threshold, and exact finite degrees of divisibility
//! barriers.
//!
//! With `N = k - d` and `m = l + 2`, the residue profile at `x` is
//! `h_i(x) = sum_{j' ≡ i mod m} C(N, j') x^j' (1-x)^(N-j')`. For residue
//! `j`, the normalized minimum d-degree of the barrier with `|V1| = xn` tends
//! to `f_j(x) = min_{t=0..d} h_{(j-t) mod m}(x)`, and `g = max_j max_x f_j`.

use crate::combin::{binomial, binomial_big, binomial_f64};
use crate::constructions::{BarrierSpec, ConstructionError};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThresholdError {
    #[error("need 1 <= d <= k-1, got k = {k}, d = {d}")]
    BadDegree { k: usize, d: usize },
    #[error("need 0 <= ell <= k-1, got k = {k}, ell = {ell}")]
    BadEll { k: usize, ell: usize },
    #[error("modulus m = {m} must be at least 2")]
    BadModulus { m: usize },
    #[error("x = {x} outside [0, 1]")]
    BadX { x: String },
    #[error("k - d = {kd} too large for exact 64-bit sums")]
    TooLarge { kd: usize },
    #[error(transparent)]
    Construction(#[from] ConstructionError),
}

fn check_kd(k: usize, d: usize) -> Result<(), ThresholdError> {
    if d == 0 || d >= k {
        return Err(ThresholdError::BadDegree { k, d });
    }
    Ok(())
}

fn check_kdl(k: usize, d: usize, ell: usize) -> Result<(), ThresholdError> {
    check_kd(k, d)?;
    if ell >= k {
        return Err(ThresholdError::BadEll { k, ell });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidueProfile {
    pub m: usize,
    pub values: Vec<f64>,
}

impl ResidueProfile {
    /// `min_{t=0..d} h_{(j-t) mod m}`.
    pub fn min_over_window(&self, j: usize, d: usize) -> f64 {
        (0..=d).map(|t| self.values[window_class(j, t, self.m)]).fold(f64::INFINITY, f64::min)
    }
}

fn window_class(j: usize, t: usize, m: usize) -> usize {
    (j + m - t % m) % m
}

// values[i] = sum over j' ≡ i mod m of the Bernstein terms of degree big_n
fn profile_values(big_n: usize, m: usize, x: f64) -> Vec<f64> {
    let mut values = vec![0.0; m];
    let y = 1.0 - x;
    for jp in 0..=big_n {
        let term = binomial_f64(big_n as u64, jp as u64) * x.powi(jp as i32) * y.powi((big_n - jp) as i32);
        values[jp % m] += term;
    }
    values
}

pub fn residue_profile(k: usize, d: usize, m: usize, x: f64) -> Result<ResidueProfile, ThresholdError> {
    check_kd(k, d)?;
    if m < 2 {
        return Err(ThresholdError::BadModulus { m });
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(ThresholdError::BadX { x: x.to_string() });
    }
    Ok(ResidueProfile { m, values: profile_values(k - d, m, x) })
}

/// `f_j(x)`: the asymptotic normalized minimum d-degree of `H_l^j(x)`.
pub fn g_objective(k: usize, d: usize, ell: usize, j: usize, x: f64) -> Result<f64, ThresholdError> {
    check_kdl(k, d, ell)?;
    Ok(residue_profile(k, d, ell + 2, x)?.min_over_window(j % (ell + 2), d))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub k: usize,
    pub d: usize,
    pub ell: usize,
    pub g: f64,
    pub x_star: f64,
    pub j_star: usize,
    pub profile: ResidueProfile,
    /// The `t` in `0..=d` whose class attains the minimum at `x_star`.
    pub certificate: Vec<usize>,
}

const GRID_POINTS: usize = 100_001;
const REFINE_TOL: f64 = 1e-10;
// grid local maxima within this of the best grid value get refined
const CANDIDATE_SLACK: f64 = 1e-4;
// values this close count as ties
const TIE_TOL: f64 = 1e-12;

// root of a sign change of `f` on [lo, hi]
fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    while hi - lo > REFINE_TOL {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Maximizes `f_j(x)` over `j` and `x`: a uniform grid of `10^5 + 1`
/// points, then bisection on pairwise differences and on derivatives of
/// the active classes near every promising grid maximum. Ties prefer the
/// larger `x`, then the smaller `j`.
pub fn g_optimize(k: usize, d: usize, ell: usize) -> Result<ThresholdResult, ThresholdError> {
    check_kdl(k, d, ell)?;
    let m = ell + 2;
    let big_n = k - d;
    let xs: Vec<f64> = (0..GRID_POINTS).map(|i| i as f64 / (GRID_POINTS - 1) as f64).collect();
    let profiles: Vec<Vec<f64>> = xs.iter().map(|&x| profile_values(big_n, m, x)).collect();
    let h = |i: usize, x: f64| profile_values(big_n, m, x)[i];
    // derivative of a Bernstein class sum: N (h^{N-1}_{i-1} - h^{N-1}_i)
    let dh = |i: usize, x: f64| {
        if big_n == 0 {
            return 0.0;
        }
        let lower = profile_values(big_n - 1, m, x);
        big_n as f64 * (lower[(i + m - 1) % m] - lower[i])
    };

    let mut best: Option<(f64, f64, usize)> = None;
    let consider = |g: f64, x: f64, j: usize, best: &mut Option<(f64, f64, usize)>| {
        let better = match *best {
            None => true,
            Some((bg, bx, bj)) => {
                if (g - bg).abs() > TIE_TOL {
                    g > bg
                } else if x != bx {
                    x > bx
                } else {
                    j < bj
                }
            }
        };
        if better {
            *best = Some((g, x, j));
        }
    };

    for j in 0..m {
        let mut classes: Vec<usize> = (0..=d).map(|t| window_class(j, t, m)).collect();
        classes.sort_unstable();
        classes.dedup();
        let f = |p: &[f64]| classes.iter().map(|&c| p[c]).fold(f64::INFINITY, f64::min);
        let fx = |x: f64| f(&profile_values(big_n, m, x));
        let vals: Vec<f64> = profiles.iter().map(|p| f(p)).collect();
        let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for i in 0..GRID_POINTS {
            let left = if i > 0 { vals[i - 1] } else { f64::NEG_INFINITY };
            let right = if i + 1 < GRID_POINTS { vals[i + 1] } else { f64::NEG_INFINITY };
            if vals[i] < left || vals[i] < right || vals[i] < top - CANDIDATE_SLACK {
                continue;
            }
            // interior plateau points add nothing over the plateau's ends
            let edge = i == 0 || i + 1 == GRID_POINTS;
            if !edge && vals[i] == left && vals[i] == right {
                continue;
            }
            consider(vals[i], xs[i], j, &mut best);
            let lo = xs[i.saturating_sub(1)];
            let hi = xs[(i + 1).min(GRID_POINTS - 1)];
            let mut cands = Vec::new();
            for (ai, &a) in classes.iter().enumerate() {
                let da = |x: f64| dh(a, x);
                if da(lo) * da(hi) < 0.0 {
                    cands.push(bisect(da, lo, hi));
                }
                for &b in &classes[ai + 1..] {
                    let diff = |x: f64| h(a, x) - h(b, x);
                    if diff(lo) * diff(hi) < 0.0 {
                        cands.push(bisect(diff, lo, hi));
                    }
                }
            }
            for x in cands {
                consider(fx(x), x, j, &mut best);
            }
        }
    }
    let (g, x_star, j_star) = best.expect("grid is nonempty");
    let profile = ResidueProfile { m, values: profile_values(big_n, m, x_star) };
    let certificate = (0..=d).filter(|&t| profile.values[window_class(j_star, t, m)] <= g + 1e-9).collect();
    Ok(ThresholdResult { k, d, ell, g, x_star, j_star, profile, certificate })
}

/// `C_i = sum_{j' ≡ i mod 3} C(k-d, j')`, exactly.
pub fn half_point_exact(k: usize, d: usize) -> Result<[u64; 3], ThresholdError> {
    check_kd(k, d)?;
    let big_n = k - d;
    if big_n > 62 {
        return Err(ThresholdError::TooLarge { kd: big_n });
    }
    let mut c = [0u64; 3];
    for jp in 0..=big_n {
        c[jp % 3] += binomial(big_n as u64, jp as u64).expect("k-d <= 62 fits");
    }
    Ok(c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `rhs - lhs`; negative means violated (for strict bounds, zero too).
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub k: usize,
    pub d: usize,
    pub ell: usize,
    pub g: f64,
    pub checks: Vec<BoundCheck>,
    pub pass: bool,
}

/// Tolerance granted to the numerically optimized `g`.
pub const BOUND_TOL: f64 = 1e-6;

/// Checks `g` against every applicable inequality: `g <= 1/(d+1)` when
/// `d <= l+1`, `g <= 1/(l+2)` when `d >= l+1`, and for `l = 1`, `d >= 2`:
/// `floor(2^(k-d)/3) 2^(d-k) <= g < 1/3`.
pub fn g_bounds_check(k: usize, d: usize, ell: usize, g: f64) -> Result<BoundsReport, ThresholdError> {
    check_kdl(k, d, ell)?;
    let mut checks = Vec::new();
    let mut le = |name: &str, lhs: f64, rhs: f64| {
        checks.push(BoundCheck { name: name.into(), lhs, rhs, holds: lhs <= rhs + BOUND_TOL, slack: rhs - lhs });
    };
    if d <= ell + 1 {
        le("g <= 1/(d+1)", g, 1.0 / (d + 1) as f64);
    }
    if d >= ell + 1 {
        le("g <= 1/(ell+2)", g, 1.0 / (ell + 2) as f64);
    }
    if ell == 1 && d >= 2 {
        let c = half_point_exact(k, d)?;
        let lower = *c.iter().min().unwrap() as f64 / 2f64.powi((k - d) as i32);
        le("floor(2^(k-d)/3) 2^(d-k) <= g", lower, g);
        let upper = 1.0 / 3.0;
        checks.push(BoundCheck { name: "g < 1/3".into(), lhs: g, rhs: upper, holds: g < upper, slack: upper - g });
    }
    let pass = checks.iter().all(|c| c.holds);
    Ok(BoundsReport { k, d, ell, g, checks, pass })
}

/// True iff `d >= max{k - l, floor(k/2) + 1}`.
pub fn g_zero_predicate(k: usize, d: usize, ell: usize) -> bool {
    d + ell >= k && d > k / 2
}

/// Space-barrier density `1 - (1 - 1/k)^(k-d)`.
pub fn space_term(k: usize, d: usize) -> f64 {
    1.0 - (1.0 - 1.0 / k as f64).powi((k - d) as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Governing {
    Divisibility,
    Space,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjectureValue {
    pub k: usize,
    pub d: usize,
    pub ell: usize,
    pub g: f64,
    pub space_term: f64,
    pub value: f64,
    /// Which barrier gives the larger density; ties go to space.
    pub governing: Governing,
}

/// `max{g(k, d, l), 1 - (1 - 1/k)^(k-d)}`.
pub fn conjectured_threshold(k: usize, d: usize, ell: usize) -> Result<ConjectureValue, ThresholdError> {
    let g = g_optimize(k, d, ell)?.g;
    let s = space_term(k, d);
    let governing = if g > s { Governing::Divisibility } else { Governing::Space };
    Ok(ConjectureValue { k, d, ell, g, space_term: s, value: g.max(s), governing })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteDegree {
    pub value: BigUint,
    /// `deg(S_t)` for `t = 0..=d`, `None` when no d-set has `t` vertices in
    /// `V1`.
    pub per_t: Vec<Option<BigUint>>,
}

/// Exact minimum d-degree of the divisibility barrier from the class
/// formula: a d-set `S_t` with `t` vertices in `V1` has degree
/// `sum_{j' ≡ j-t mod l+2} C(n1-t, j') C(n-n1-(d-t), k-d-j')`.
pub fn finite_min_degree(
    n: usize,
    k: usize,
    d: usize,
    ell: usize,
    j: usize,
    n1: usize,
) -> Result<FiniteDegree, ThresholdError> {
    check_kd(k, d)?;
    BarrierSpec::Divisibility { n, k, ell, j, n1 }.validate()?;
    let m = ell + 2;
    let n2 = n - n1;
    let per_t: Vec<Option<BigUint>> = (0..=d)
        .map(|t| {
            if t > n1 || d - t > n2 {
                return None;
            }
            let class = window_class(j, t, m);
            let mut sum = BigUint::from(0u32);
            for jp in (class..=k - d).step_by(m) {
                let a = binomial_big((n1 - t) as u64, jp as u64);
                let b = binomial_big((n2 - (d - t)) as u64, (k - d - jp) as u64);
                sum += a * b;
            }
            Some(sum)
        })
        .collect();
    let value = per_t.iter().flatten().min().cloned().expect("n >= d makes some t realizable");
    Ok(FiniteDegree { value, per_t })
}

/// CSV of `x, h_0.., f_0..` at `points` evenly spaced x values.
pub fn profile_curve_csv(k: usize, d: usize, ell: usize, points: usize) -> Result<String, ThresholdError> {
    check_kdl(k, d, ell)?;
    let m = ell + 2;
    let mut out = String::from("x");
    for i in 0..m {
        let _ = write!(out, ",h_{i}");
    }
    for j in 0..m {
        let _ = write!(out, ",f_{j}");
    }
    out.push('\n');
    let steps = points.max(2) - 1;
    for s in 0..=steps {
        let x = s as f64 / steps as f64;
        let p = residue_profile(k, d, m, x)?;
        let _ = write!(out, "{x}");
        for v in &p.values {
            let _ = write!(out, ",{v}");
        }
        for j in 0..m {
            let _ = write!(out, ",{}", p.min_over_window(j, d));
        }
        out.push('\n');
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::{admissible_first_part_sizes, divisibility_barrier};
    use num_traits::ToPrimitive;
    use proptest::prelude::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn profile_examples() {
        let p = residue_profile(6, 3, 3, 0.5).unwrap();
        assert!(close(p.values[0], 0.25, 1e-15) && close(p.values[1], 0.375, 1e-15) && close(p.values[2], 0.375, 1e-15));
        let p = residue_profile(7, 2, 4, 0.0).unwrap();
        assert_eq!(p.values, vec![1.0, 0.0, 0.0, 0.0]);
        let p = residue_profile(6, 3, 3, 0.605).unwrap();
        let min = p.values.iter().copied().fold(1.0, f64::min);
        assert!(close(min, 0.283, 1e-3));
        assert!(residue_profile(6, 6, 3, 0.5).is_err());
        assert!(residue_profile(6, 3, 1, 0.5).is_err());
        assert!(residue_profile(6, 3, 3, 1.5).is_err());
    }

    #[test]
    fn g_examples() {
        let r = g_optimize(6, 3, 1).unwrap();
        assert!(close(r.g, 0.2831, 1e-3), "{r:?}");
        assert!(close(r.x_star, 0.605, 5e-3), "{r:?}");
        let r = g_optimize(3, 1, 1).unwrap();
        assert!(close(r.g, 4.0 / 9.0, 1e-9), "{r:?}");
        assert!(close(r.x_star, 2.0 / 3.0, 1e-6) || close(r.x_star, 1.0 / 3.0, 1e-6));
        assert_eq!(g_optimize(6, 4, 2).unwrap().g, 0.0);
        let r = g_optimize(6, 3, 1).unwrap();
        let recomputed = r.profile.min_over_window(r.j_star, r.d);
        assert!(close(recomputed, r.g, 1e-12));
    }

    #[test]
    fn half_point_examples() {
        assert_eq!(half_point_exact(6, 3).unwrap(), [2, 3, 3]);
        assert_eq!(half_point_exact(9, 8).unwrap(), [1, 1, 0]);
        for kd in 1..=40 {
            let c = half_point_exact(kd + 1, 1).unwrap();
            assert_eq!(*c.iter().min().unwrap(), (1u64 << kd) / 3);
            assert_eq!(c.iter().sum::<u64>(), 1u64 << kd);
        }
    }

    #[test]
    fn bounds_examples() {
        let rep = g_bounds_check(6, 3, 1, 0.2831).unwrap();
        assert!(rep.pass);
        assert!(rep.checks.iter().any(|c| c.name.starts_with("floor") && close(c.lhs, 0.25, 1e-12)));
        let rep = g_bounds_check(5, 1, 1, 0.6).unwrap();
        assert!(!rep.pass);
        let rep = g_bounds_check(5, 2, 1, 0.3).unwrap();
        assert!(rep.checks.iter().any(|c| c.name.starts_with("floor") && close(c.lhs, 0.25, 1e-12)));
    }

    #[test]
    fn zero_predicate_examples() {
        for k in 3..=9 {
            for ell in 1..k {
                assert!(g_zero_predicate(k, k - 1, ell));
            }
            // the formula needs d = k-2 > k/2, so k >= 5
            if k >= 5 {
                for ell in 2..k {
                    assert!(g_zero_predicate(k, k - 2, ell));
                }
            }
        }
        assert!(!g_zero_predicate(6, 3, 1));
        assert!(!g_zero_predicate(4, 2, 2));
    }

    #[test]
    fn conjecture_examples() {
        let c = conjectured_threshold(3, 1, 1).unwrap();
        assert!(close(c.value, 5.0 / 9.0, 1e-12) && c.governing == Governing::Space);
        let c = conjectured_threshold(6, 4, 2).unwrap();
        assert!(close(c.value, 11.0 / 36.0, 1e-12));
        let c = conjectured_threshold(5, 2, 0).unwrap();
        assert!(close(c.value, (0.5f64).max(space_term(5, 2)), 1e-6));
    }

    #[test]
    fn finite_degree_examples() {
        let r = finite_min_degree(12, 3, 2, 0, 1, 5).unwrap();
        let per_t: Vec<u64> = r.per_t.iter().map(|v| v.as_ref().unwrap().to_u64().unwrap()).collect();
        assert_eq!(per_t, vec![5, 6, 3]);
        assert_eq!(r.value, BigUint::from(3u32));
        assert_eq!(finite_min_degree(7, 3, 1, 1, 0, 2).unwrap().value, BigUint::from(0u32));
        assert!(finite_min_degree(7, 3, 1, 1, 0, 3).is_err());
    }

    #[test]
    fn finite_degree_matches_enumeration() {
        for n in [9usize, 10, 12] {
            for k in 3..=4 {
                let ell = n % k;
                for j in 0..=ell + 1 {
                    for n1 in admissible_first_part_sizes(n, k, ell, j).unwrap() {
                        let (h, _) = divisibility_barrier(n, k, ell, j, n1).unwrap();
                        for d in 1..k {
                            let exact = finite_min_degree(n, k, d, ell, j, n1).unwrap().value;
                            assert_eq!(exact, BigUint::from(h.min_degree(d).unwrap().value), "{n} {k} {ell} {j} {n1} {d}");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn finite_degree_converges_to_objective() {
        // (k, d, l) with positive objective, n near 600 on an admissible sequence
        for (k, d, ell) in [(3, 1, 1), (6, 3, 1), (5, 2, 0)] {
            let n = (600..).find(|n| n % k == ell).unwrap();
            let j = g_optimize(k, d, ell).unwrap();
            let target = (j.x_star * n as f64) as usize;
            let sizes = admissible_first_part_sizes(n, k, ell, j.j_star).unwrap();
            let n1 = *sizes.iter().min_by_key(|&&s| s.abs_diff(target)).unwrap();
            let fin = finite_min_degree(n, k, d, ell, j.j_star, n1).unwrap().value.to_f64().unwrap();
            let norm = fin / binomial_f64((n - d) as u64, (k - d) as u64);
            let asym = g_objective(k, d, ell, j.j_star, n1 as f64 / n as f64).unwrap();
            assert!((norm - asym).abs() / asym < 0.05, "{k} {d} {ell}: {norm} vs {asym}");
        }
    }

    #[test]
    fn curve_csv_shape() {
        let csv = profile_curve_csv(6, 3, 1, 5).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,h_0,h_1,h_2,f_0,f_1,f_2");
        assert_eq!(lines.len(), 6);
    }

    proptest! {
        #[test]
        fn profile_sums_to_one(k in 2usize..20, dd in 1usize..19, m in 2usize..8, x in 0.0f64..=1.0) {
            let d = 1 + dd % (k - 1);
            let p = residue_profile(k, d, m, x).unwrap();
            prop_assert!((p.values.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.values.iter().all(|&v| v >= 0.0));
        }
    }
}
