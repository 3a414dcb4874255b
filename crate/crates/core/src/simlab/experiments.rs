use serde::Serialize;

use super::models::{simulate, true_generalized_derivative, true_spectrum, windowed_truth, SimulationModel};
use super::run_replicates;
use super::stats::{ks_standard_normal, log_log_slope, mean, Moments};
use crate::dependence::{dependence_sequence, MeasureKind};
use crate::error::{Error, Result};
use crate::spectral::{
    asymptotic_variance, estimate_from_sequence, generalized_derivative, infer, lag_window_value,
    Centering, FrequencyGrid, InferenceOptions,
};
use crate::windows::{Bandwidth, LagWindow};

/// Tail tolerance for the model truth in experiments.
const TRUTH_TAIL_TOL: f64 = 1e-13;

/// Smallest replicate count accepted by [`clt_experiment`].
pub const MIN_CLT_REPS: usize = 100;

/// How the lag-window scale depends on the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum BandwidthRule {
    Fixed { r_n: f64 },
    /// `r_n = scale · n^exponent`.
    Power { scale: f64, exponent: f64 },
}

impl BandwidthRule {
    pub fn power(exponent: f64) -> Self {
        BandwidthRule::Power { scale: 1.0, exponent }
    }

    pub fn bandwidth(&self, n: usize) -> Result<Bandwidth> {
        let r_n = match *self {
            BandwidthRule::Fixed { r_n } => r_n,
            BandwidthRule::Power { scale, exponent } => scale * (n as f64).powf(exponent),
        };
        Bandwidth::user(r_n)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CltConfig {
    pub model: SimulationModel,
    pub kind: MeasureKind,
    pub window: LagWindow,
    pub rule: BandwidthRule,
    pub omegas: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub master_seed: u64,
    /// Level of the plug-in intervals whose coverage is reported.
    pub alpha: f64,
    pub centering: Centering,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZSummary {
    pub mean: f64,
    pub variance: f64,
    pub skewness: f64,
    pub excess_kurtosis: f64,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    /// KS p-value above 0.01, `|skewness| < 0.3` and `|excess kurtosis| < 0.8`.
    pub normality_pass: bool,
}

impl ZSummary {
    fn of(z: &[f64]) -> Self {
        let m = Moments::of(z);
        let ks = ks_standard_normal(z);
        Self {
            mean: m.mean,
            variance: m.variance,
            skewness: m.skewness,
            excess_kurtosis: m.excess_kurtosis,
            ks_statistic: ks.statistic,
            ks_p_value: ks.p_value,
            normality_pass: ks.p_value > 0.01 && m.skewness.abs() < 0.3 && m.excess_kurtosis.abs() < 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaSummary {
    pub omega: f64,
    pub f_true: f64,
    /// Model spectrum of the variance reference measure.
    pub f_reference_true: f64,
    /// `σ²(ω)` from the model.
    pub sigma2_true: f64,
    /// `E f̂ − f` with the model's `ξ_k` in the finite lag-window sum.
    pub exact_bias: f64,
    /// `−C_w r_n^{−d} f^{[d]}(ω)` from the model.
    pub asymptotic_bias: f64,
    pub mean: f64,
    pub variance: f64,
    /// `(n / r_n) · variance`, comparable to `sigma2_true`.
    pub scaled_variance: f64,
    /// `mean − f_true`.
    pub bias: f64,
    pub rmse: f64,
    pub z: ZSummary,
    pub coverage: f64,
    pub degenerate_count: usize,
    /// Per-replicate `f̂(ω)` in replicate order.
    pub f_hat: Vec<f64>,
    /// Per-replicate standardized values.
    pub z_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub model: SimulationModel,
    pub kind: MeasureKind,
    pub window: LagWindow,
    pub r_n: f64,
    pub n: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub alpha: f64,
    pub centering: Centering,
    pub summaries: Vec<OmegaSummary>,
}

impl McReport {
    pub fn at(&self, omega: f64) -> Option<&OmegaSummary> {
        self.summaries.iter().find(|s| s.omega == omega)
    }
}

struct Replicate {
    f_hat: Vec<f64>,
    covered: Vec<bool>,
    degenerate: Vec<bool>,
}

/// Simulates `reps` series, estimates the spectrum on `omegas` and
/// standardizes with model quantities:
/// `z = sqrt(n/r_n) (f̂ − f − b) / σ` where `b` is the exact bias of the
/// finite lag-window sum. Coverage uses the plug-in intervals.
pub fn clt_experiment(config: &CltConfig) -> Result<McReport> {
    if config.reps < MIN_CLT_REPS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_CLT_REPS} replicates are required, got {}",
            config.reps
        )));
    }
    let grid = FrequencyGrid::new(config.omegas.clone())?;
    let bandwidth = config.rule.bandwidth(config.n)?;
    bandwidth.check_for(config.n)?;
    let kind = config.kind;
    let reference = kind.variance_reference();
    let window = config.window;
    let lags = bandwidth.max_lag();
    let options = InferenceOptions { alpha: config.alpha, centering: config.centering, ..Default::default() };

    let truth = true_spectrum(&config.model, kind, &grid, TRUTH_TAIL_TOL)?;
    let ref_truth = true_spectrum(&config.model, reference, &grid, TRUTH_TAIL_TOL)?;
    let d = window.exponent();
    let deriv_truth = true_generalized_derivative(&config.model, kind, d, &grid, TRUTH_TAIL_TOL)?;

    let replicates = run_replicates(config.reps, config.master_seed, |_, seed| {
        let series = simulate(&config.model, config.n, seed)?;
        let seq = dependence_sequence(&series, kind, lags)?;
        let estimate = estimate_from_sequence(&seq, &window, &bandwidth, &grid)?;
        let ref_estimate = if reference == kind {
            estimate.clone()
        } else {
            let ref_seq = dependence_sequence(&series, reference, lags)?;
            estimate_from_sequence(&ref_seq, &window, &bandwidth, &grid)?
        };
        let derivative = generalized_derivative(&seq, &window, &bandwidth, d, &grid)?;
        let inferred = infer(&estimate, &ref_estimate, &derivative, &options)?;
        let mut rep = Replicate { f_hat: vec![], covered: vec![], degenerate: vec![] };
        for (point, f) in inferred.points.iter().zip(&truth.values) {
            let inf = point.inference.expect("inference was requested");
            rep.f_hat.push(point.f_hat);
            rep.covered.push(inf.ci_low <= *f && *f <= inf.ci_high);
            rep.degenerate.push(inf.degenerate);
        }
        Ok(rep)
    })?;

    let r_n = bandwidth.r_n;
    let n = config.n as f64;
    let reps = config.reps as f64;
    let mut summaries = Vec::with_capacity(grid.len());
    for (j, &omega) in grid.omegas().iter().enumerate() {
        let f_true = truth.values[j];
        let f_ref = ref_truth.values[j];
        let sigma2 = asymptotic_variance(kind, &window, f_ref, omega);
        let exact_bias = windowed_truth(&config.model, kind, &window, r_n, omega)? - f_true;
        let asymptotic_bias = -window.c_w() * r_n.powi(-(d as i32)) * deriv_truth.values[j];
        let f_hat: Vec<f64> = replicates.iter().map(|r| r.f_hat[j]).collect();
        let scale = (n / r_n).sqrt() / sigma2.sqrt();
        let z_values: Vec<f64> = f_hat.iter().map(|f| scale * (f - f_true - exact_bias)).collect();
        let moments = Moments::of(&f_hat);
        let errors: Vec<f64> = f_hat.iter().map(|f| (f - f_true).powi(2)).collect();
        summaries.push(OmegaSummary {
            omega,
            f_true,
            f_reference_true: f_ref,
            sigma2_true: sigma2,
            exact_bias,
            asymptotic_bias,
            mean: moments.mean,
            variance: moments.variance,
            scaled_variance: moments.variance * n / r_n,
            bias: moments.mean - f_true,
            rmse: mean(&errors).sqrt(),
            z: ZSummary::of(&z_values),
            coverage: replicates.iter().filter(|r| r.covered[j]).count() as f64 / reps,
            degenerate_count: replicates.iter().filter(|r| r.degenerate[j]).count(),
            f_hat,
            z_values,
        });
    }

    Ok(McReport {
        model: config.model,
        kind,
        window,
        r_n,
        n: config.n,
        reps: config.reps,
        master_seed: config.master_seed,
        alpha: config.alpha,
        centering: config.centering,
        summaries,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasConfig {
    pub model: SimulationModel,
    pub kind: MeasureKind,
    pub window: LagWindow,
    pub omega: f64,
    pub n: usize,
    pub reps: usize,
    pub bandwidths: Vec<f64>,
    pub master_seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasRow {
    pub r_n: f64,
    pub mean_f_hat: f64,
    /// `mean f̂ − f_true`.
    pub bias: f64,
    /// Monte Carlo standard error of `bias`.
    pub mc_se: f64,
    pub exact_bias: f64,
    pub asymptotic_bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasReport {
    pub model: SimulationModel,
    pub kind: MeasureKind,
    pub window: LagWindow,
    pub omega: f64,
    pub n: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub f_true: f64,
    pub rows: Vec<BiasRow>,
    /// Slope of `ln |bias|` on `ln r_n`.
    pub slope: Option<f64>,
    /// The same slope for the exact bias of the lag-window sum.
    pub exact_slope: Option<f64>,
}

/// Monte Carlo bias of `f̂(ω)` at several bandwidths. Every bandwidth
/// reuses the same simulated series.
pub fn bias_experiment(config: &BiasConfig) -> Result<BiasReport> {
    if config.reps < 2 {
        return Err(Error::InvalidParameter("at least 2 replicates are required".into()));
    }
    if config.bandwidths.is_empty() {
        return Err(Error::InvalidParameter("empty bandwidth list".into()));
    }
    let grid = FrequencyGrid::single(config.omega)?;
    let bandwidths = config
        .bandwidths
        .iter()
        .map(|&r| {
            let b = Bandwidth::user(r)?;
            b.check_for(config.n)?;
            Ok(b)
        })
        .collect::<Result<Vec<_>>>()?;
    let lags = bandwidths.iter().map(Bandwidth::max_lag).max().unwrap_or(0);
    let window = config.window;
    let kind = config.kind;

    let estimates = run_replicates(config.reps, config.master_seed, |_, seed| {
        let series = simulate(&config.model, config.n, seed)?;
        let seq = dependence_sequence(&series, kind, lags)?;
        bandwidths
            .iter()
            .map(|b| lag_window_value(&seq, &window, b, config.omega))
            .collect::<Result<Vec<_>>>()
    })?;

    let f_true = true_spectrum(&config.model, kind, &grid, TRUTH_TAIL_TOL)?.values[0];
    let d = window.exponent();
    let f_d = true_generalized_derivative(&config.model, kind, d, &grid, TRUTH_TAIL_TOL)?.values[0];
    let rows = bandwidths
        .iter()
        .enumerate()
        .map(|(j, b)| {
            let values: Vec<f64> = estimates.iter().map(|e| e[j]).collect();
            let m = Moments::of(&values);
            Ok(BiasRow {
                r_n: b.r_n,
                mean_f_hat: m.mean,
                bias: m.mean - f_true,
                mc_se: (m.variance / config.reps as f64).sqrt(),
                exact_bias: windowed_truth(&config.model, kind, &window, b.r_n, config.omega)? - f_true,
                asymptotic_bias: -window.c_w() * b.r_n.powi(-(d as i32)) * f_d,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let rs: Vec<f64> = rows.iter().map(|r| r.r_n).collect();
    let abs = |f: fn(&BiasRow) -> f64| rows.iter().map(|r| f(r).abs()).collect::<Vec<_>>();
    Ok(BiasReport {
        model: config.model,
        kind,
        window,
        omega: config.omega,
        n: config.n,
        reps: config.reps,
        master_seed: config.master_seed,
        f_true,
        slope: log_log_slope(&rs, &abs(|r| r.bias)),
        exact_slope: log_log_slope(&rs, &abs(|r| r.exact_bias)),
        rows,
    })
}
