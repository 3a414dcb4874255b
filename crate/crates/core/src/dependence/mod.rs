//! Lag-`k` dependence measures `ξ_{n,k}` as U-statistics over the lagged
//! pairs `(X_t, X_{t+k})`.
//!
//! Kendall's τ and Spearman's ρ are computed in `O(N log N)` from sorting
//! and inversion counts; [`enumerate`] holds the brute-force definitions.
//! Both share the same tie convention: a tied comparison contributes sign
//! zero, so ties shrink `|τ|` and `|ρ|`. The estimators assume continuous
//! data and callers should surface [`TimeSeries::has_ties`] as a warning.

pub mod enumerate;
pub mod rank;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::TimeSeries;
use enumerate::binomial;

/// A lagged observation pair `(X_t, X_{t+k})`.
pub type Pair = (f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureKind {
    Covariance,
    KendallTau,
    SpearmanRho,
}

impl MeasureKind {
    /// Order `m` of the U-statistic kernel.
    pub fn order(self) -> usize {
        match self {
            MeasureKind::Covariance | MeasureKind::KendallTau => 2,
            MeasureKind::SpearmanRho => 3,
        }
    }

    /// Smallest number of lagged pairs the estimator accepts; the largest
    /// admissible lag is `n − min_pairs`.
    pub fn min_pairs(self) -> usize {
        match self {
            MeasureKind::Covariance | MeasureKind::KendallTau => 3,
            MeasureKind::SpearmanRho => 4,
        }
    }

    /// Ratio of the asymptotic variance of the lag-window estimate to
    /// `(1 + I(ω ∈ {0, π})) f_ref(ω)² ∫w²`, where `f_ref` is the Spearman
    /// spectrum for the rank measures and the spectrum itself for the
    /// covariance.
    pub fn variance_factor(self) -> f64 {
        match self {
            MeasureKind::KendallTau => 4.0 / 9.0,
            MeasureKind::SpearmanRho | MeasureKind::Covariance => 1.0,
        }
    }

    /// Kind of the spectrum that drives the asymptotic variance.
    pub fn variance_reference(self) -> MeasureKind {
        match self {
            MeasureKind::Covariance => MeasureKind::Covariance,
            MeasureKind::KendallTau | MeasureKind::SpearmanRho => MeasureKind::SpearmanRho,
        }
    }

    pub fn is_rank_based(self) -> bool {
        self != MeasureKind::Covariance
    }

    pub fn short_name(self) -> &'static str {
        match self {
            MeasureKind::Covariance => "cov",
            MeasureKind::KendallTau => "tau",
            MeasureKind::SpearmanRho => "rho",
        }
    }
}

impl fmt::Display for MeasureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.short_name())
    }
}

impl FromStr for MeasureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cov" | "covariance" | "autocovariance" => Ok(MeasureKind::Covariance),
            "tau" | "kendall" | "kendall-tau" => Ok(MeasureKind::KendallTau),
            "rho" | "spearman" | "spearman-rho" => Ok(MeasureKind::SpearmanRho),
            other => Err(Error::InvalidParameter(format!("unknown measure `{other}`"))),
        }
    }
}

pub(crate) fn check_lag(n: usize, k: usize, min_pairs: usize) -> Result<()> {
    let max = n.saturating_sub(min_pairs);
    if n < min_pairs || k > max {
        return Err(Error::LagOutOfRange { lag: k, max });
    }
    Ok(())
}

/// The `n − k` pairs `(X_t, X_{t+k})` in time order. Requires `k ≤ n − 2`.
pub fn lag_pairs(values: &[f64], k: usize) -> Result<Vec<Pair>> {
    check_lag(values.len(), k, 2)?;
    Ok(values.iter().zip(&values[k..]).map(|(&x, &y)| (x, y)).collect())
}

fn lagged(series: &TimeSeries, k: usize) -> (&[f64], &[f64]) {
    let v = series.values();
    (&v[..v.len() - k], &v[k..])
}

/// Kendall's τ at lag `k`; requires `k ≤ n − 3`.
pub fn kendall_tau_lag(series: &TimeSeries, k: usize) -> Result<f64> {
    check_lag(series.len(), k, MeasureKind::KendallTau.min_pairs())?;
    let (xs, ys) = lagged(series, k);
    let balance = rank::concordance_balance(xs, ys);
    Ok(balance as f64 / binomial(xs.len(), 2))
}

/// Spearman's ρ at lag `k` as the order-3 U-statistic; requires `k ≤ n − 4`.
///
/// Summing the kernel over all ordered triples of distinct indices gives
/// `½ Σ_a [R_x(a) R_y(a) − Σ_{b≠a} sgn(x_a−x_b) sgn(y_a−y_b)]`, where
/// `R_x(a) = Σ_{b≠a} sgn(x_a − x_b)`. The first part needs only ranks and
/// the second is twice the Kendall balance.
pub fn spearman_rho_lag(series: &TimeSeries, k: usize) -> Result<f64> {
    check_lag(series.len(), k, MeasureKind::SpearmanRho.min_pairs())?;
    let (xs, ys) = lagged(series, k);
    let rx = rank::sign_rank_sums(xs);
    let ry = rank::sign_rank_sums(ys);
    let cross: i128 = rx.iter().zip(&ry).map(|(&a, &b)| a as i128 * b as i128).sum();
    let twice_sum = cross - 2 * rank::concordance_balance(xs, ys) as i128;
    Ok(twice_sum as f64 / (2.0 * binomial(xs.len(), 3)))
}

/// Autocovariance at lag `k` as the U-statistic with kernel
/// `½ (x1 − x2)(y1 − y2)`; requires `k ≤ n − 3`.
///
/// The pairwise sum collapses to `Σ (x_t − x̄)(y_t − ȳ) / (N − 1)` with
/// separate means for the leading and lagged coordinates.
pub fn autocovariance_lag(series: &TimeSeries, k: usize) -> Result<f64> {
    check_lag(series.len(), k, MeasureKind::Covariance.min_pairs())?;
    let (xs, ys) = lagged(series, k);
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let s: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(s / (n - 1.0))
}

pub fn lag_estimate(series: &TimeSeries, kind: MeasureKind, k: usize) -> Result<f64> {
    match kind {
        MeasureKind::Covariance => autocovariance_lag(series, k),
        MeasureKind::KendallTau => kendall_tau_lag(series, k),
        MeasureKind::SpearmanRho => spearman_rho_lag(series, k),
    }
}

/// Estimates `ξ_{n,k}` for `k = 0, …, K`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DependenceSequence {
    pub kind: MeasureKind,
    pub n: usize,
    pub xi: Vec<f64>,
    /// Set when the series contains tied values.
    pub tie_warning: bool,
}

impl DependenceSequence {
    pub fn max_lag(&self) -> usize {
        self.xi.len() - 1
    }

    /// `ξ_{n,k}` for a signed lag, using `ξ_{n,−k} = ξ_{n,k}`.
    pub fn at(&self, k: i64) -> Option<f64> {
        self.xi.get(k.unsigned_abs() as usize).copied()
    }
}

/// Computes `ξ_{n,0}, …, ξ_{n,max_lag}`; requires `max_lag ≤ n − 4`.
/// Lags are evaluated in parallel; the result does not depend on scheduling.
pub fn dependence_sequence(
    series: &TimeSeries,
    kind: MeasureKind,
    max_lag: usize,
) -> Result<DependenceSequence> {
    check_lag(series.len(), max_lag, 4)?;
    let xi = (0..=max_lag)
        .into_par_iter()
        .map(|k| lag_estimate(series, kind, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(DependenceSequence { kind, n: series.len(), xi, tie_warning: series.has_ties() })
}

impl TimeSeries {
    pub fn lag_pairs(&self, k: usize) -> Result<Vec<Pair>> {
        lag_pairs(self.values(), k)
    }
}
