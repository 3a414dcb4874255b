//! Brute-force U-statistic enumeration over lagged pairs.
//!
//! These are the reference definitions the fast estimators are checked
//! against: every subset of `m` lagged pairs is visited, costing
//! `O(N^m)` for `N = n − k` pairs.

use super::rank::sign;
use super::{check_lag, lag_pairs, Pair};
use crate::error::Result;

/// `C(n, m)` as a float.
pub fn binomial(n: usize, m: usize) -> f64 {
    if m > n {
        return 0.0;
    }
    (0..m).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64).round()
}

/// Order-2 U-statistic `C(N,2)^{-1} Σ_{i<j} h(z_i, z_j)`.
pub fn u_statistic2(pairs: &[Pair], h: impl Fn(Pair, Pair) -> f64) -> f64 {
    let mut sum = 0.0;
    for (i, &a) in pairs.iter().enumerate() {
        for &b in &pairs[i + 1..] {
            sum += h(a, b);
        }
    }
    sum / binomial(pairs.len(), 2)
}

/// Order-3 U-statistic `C(N,3)^{-1} Σ_{i<j<l} h(z_i, z_j, z_l)`.
pub fn u_statistic3(pairs: &[Pair], h: impl Fn(Pair, Pair, Pair) -> f64) -> f64 {
    let mut sum = 0.0;
    for (i, &a) in pairs.iter().enumerate() {
        for (j, &b) in pairs.iter().enumerate().skip(i + 1) {
            for &c in &pairs[j + 1..] {
                sum += h(a, b, c);
            }
        }
    }
    sum / binomial(pairs.len(), 3)
}

/// `I(a < b) − 1/2` with tied arguments mapped to 0.
fn centered_less(a: f64, b: f64) -> f64 {
    0.5 * sign(b, a) as f64
}

/// Kendall kernel in product form `4 (I(x1<x2) − ½)(I(y1<y2) − ½)`.
pub fn tau_product_kernel(a: Pair, b: Pair) -> f64 {
    4.0 * centered_less(a.0, b.0) * centered_less(a.1, b.1)
}

/// Kendall kernel in concordance form
/// `2 I(x1<x2, y1<y2) + 2 I(x2<x1, y2<y1) − 1`.
///
/// Agrees with [`tau_product_kernel`] only when neither coordinate is tied;
/// a tied pair scores −1 here.
pub fn tau_concordance_kernel(a: Pair, b: Pair) -> f64 {
    let up = (a.0 < b.0 && a.1 < b.1) as i32;
    let down = (b.0 < a.0 && b.1 < a.1) as i32;
    (2 * up + 2 * down - 1) as f64
}

/// Spearman kernel of order 3:
/// `Σ_γ 2 (I(x_γ1 < x_γ2) − ½)(I(y_γ1 < y_γ3) − ½)` over the six
/// permutations `γ` of the three arguments.
pub fn rho_kernel(a: Pair, b: Pair, c: Pair) -> f64 {
    let z = [a, b, c];
    const PERMS: [[usize; 3]; 6] =
        [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .map(|p| 2.0 * centered_less(z[p[0]].0, z[p[1]].0) * centered_less(z[p[0]].1, z[p[2]].1))
        .sum()
}

/// Covariance kernel `½ (x1 − x2)(y1 − y2)`.
pub fn covariance_kernel(a: Pair, b: Pair) -> f64 {
    0.5 * (a.0 - b.0) * (a.1 - b.1)
}

pub fn kendall_tau_enumerate(values: &[f64], k: usize) -> Result<f64> {
    check_lag(values.len(), k, 3)?;
    Ok(u_statistic2(&lag_pairs(values, k)?, tau_product_kernel))
}

pub fn kendall_tau_concordance_enumerate(values: &[f64], k: usize) -> Result<f64> {
    check_lag(values.len(), k, 3)?;
    Ok(u_statistic2(&lag_pairs(values, k)?, tau_concordance_kernel))
}

pub fn spearman_rho_enumerate(values: &[f64], k: usize) -> Result<f64> {
    check_lag(values.len(), k, 4)?;
    Ok(u_statistic3(&lag_pairs(values, k)?, rho_kernel))
}

pub fn autocovariance_enumerate(values: &[f64], k: usize) -> Result<f64> {
    check_lag(values.len(), k, 3)?;
    Ok(u_statistic2(&lag_pairs(values, k)?, covariance_kernel))
}
