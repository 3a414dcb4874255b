//! Summary statistics used by the Monte Carlo experiments.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

/// Compensated (Neumaier) sum. The result depends only on the order of
/// `values`, so sums over replicate vectors are reproducible.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

pub fn mean(values: &[f64]) -> f64 {
    neumaier_sum(values.iter().copied()) / values.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
}

impl Moments {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let m = mean(values);
        let central = |p: i32| neumaier_sum(values.iter().map(|v| (v - m).powi(p))) / n;
        let m2 = central(2);
        Self {
            count: values.len(),
            mean: m,
            variance: m2 * n / (n - 1.0),
            skewness: central(3) / m2.powf(1.5),
            excess_kurtosis: central(4) / (m2 * m2) - 3.0,
        }
    }
}

/// Kolmogorov distribution survival function `P(K > λ)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let term = (-2.0 * (j * j) as f64 * lambda * lambda).exp();
        sum += if j % 2 == 1 { term } else { -term };
        if term < 1e-17 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov-Smirnov test against `N(0, 1)`, with Stephens'
/// finite-sample correction of the asymptotic p-value.
pub fn ks_standard_normal(values: &[f64]) -> KsTest {
    let normal = Normal::standard();
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = normal.cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max);
    let sqrt_n = n.sqrt();
    let lambda = (sqrt_n + 0.12 + 0.11 / sqrt_n) * statistic;
    KsTest { statistic, p_value: kolmogorov_survival(lambda) }
}

/// Least-squares slope of `y` on `x`.
pub fn ols_slope(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    let sxy = neumaier_sum(x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)));
    let sxx = neumaier_sum(x.iter().map(|a| (a - mx) * (a - mx)));
    sxy / sxx
}

/// Slope of `ln y` on `ln x`; `None` when any `y` is not positive.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if y.iter().any(|v| v.is_nan() || *v <= 0.0) || x.len() < 2 {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    Some(ols_slope(&lx, &ly))
}
