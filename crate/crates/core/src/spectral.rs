//! Lag-window spectral estimates and their asymptotic inference.
//!
//! For a dependence sequence `ξ_{n,k}` and window `w` with scale `r_n`:
//!
//! ```text
//! f̂(ω)     = (1/2π) [ξ_0 + 2 Σ_{k=1}^{⌊r_n⌋} w(k/r_n) ξ_k cos kω]
//! f̂^{[d]}(ω) = (1/2π) 2 Σ_{k=1}^{⌊r_n⌋} w(k/r_n) k^d ξ_k cos kω
//! σ²(ω)    = c_ξ (1 + I(ω ∈ {0, π})) f_ρ(ω)² ∫w²,   c_τ = 4/9, c_ρ = 1
//! bias(ω)  ≈ −C_w(d) r_n^{−d} f^{[d]}(ω)
//! ```
//!
//! Kendall-τ estimates take their variance from the Spearman-ρ spectrum,
//! so inference for τ always needs a ρ estimate on the same grid.

use std::f64::consts::PI;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dependence::{dependence_sequence, DependenceSequence, MeasureKind};
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::windows::{Bandwidth, BandwidthOrigin, LagWindow};

/// Frequencies closer than this to `0` or `±π` use the doubled variance.
pub const BOUNDARY_TOL: f64 = 1e-9;

/// Default floor on `|f̂_ρ(ω)|` below which an estimate is flagged degenerate.
pub const DEFAULT_DEGENERACY_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrequencyGrid {
    omegas: Vec<f64>,
}

impl FrequencyGrid {
    /// Validates that every frequency lies in `(−π, π]` and the list is sorted.
    pub fn new(omegas: Vec<f64>) -> Result<Self> {
        if omegas.is_empty() {
            return Err(Error::InvalidParameter("empty frequency grid".into()));
        }
        if let Some(w) = omegas.iter().find(|w| !(w.is_finite() && **w > -PI && **w <= PI)) {
            return Err(Error::InvalidParameter(format!("frequency {w} outside (-pi, pi]")));
        }
        if omegas.windows(2).any(|p| p[0] > p[1]) {
            return Err(Error::InvalidParameter("frequency grid is not sorted".into()));
        }
        Ok(Self { omegas })
    }

    /// `{πj/G : j = 0, …, G}`.
    pub fn uniform(g: usize) -> Result<Self> {
        if g == 0 {
            return Err(Error::InvalidParameter("grid size must be positive".into()));
        }
        // the last point is set exactly so it is not pushed past pi by rounding
        let mut omegas: Vec<f64> = (0..g).map(|j| PI * j as f64 / g as f64).collect();
        omegas.push(PI);
        Self::new(omegas)
    }

    pub fn single(omega: f64) -> Result<Self> {
        Self::new(vec![omega])
    }

    pub fn omegas(&self) -> &[f64] {
        &self.omegas
    }

    pub fn len(&self) -> usize {
        self.omegas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.omegas.is_empty()
    }
}

/// Whether `ω` is (numerically) one of the frequencies `0`, `±π` where the
/// asymptotic variance doubles.
pub fn is_boundary_frequency(omega: f64) -> bool {
    omega.abs() < BOUNDARY_TOL || (omega.abs() - PI).abs() < BOUNDARY_TOL
}

/// `(1/2π)[a_0 + 2 Σ_{k≥1} a_k cos kω]`.
pub fn cosine_sum(coefficients: &[f64], omega: f64) -> f64 {
    let tail: f64 = coefficients
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, a)| a * (k as f64 * omega).cos())
        .sum();
    (coefficients.first().copied().unwrap_or(0.0) + 2.0 * tail) / (2.0 * PI)
}

fn lags_in_window(seq: &DependenceSequence, bandwidth: &Bandwidth) -> Result<usize> {
    let needed = bandwidth.max_lag();
    if needed > seq.max_lag() {
        return Err(Error::BandwidthTooLarge { r_n: bandwidth.r_n, needed, max: seq.max_lag() });
    }
    Ok(needed)
}

/// `f̂(ω)` from an already computed dependence sequence.
pub fn lag_window_value(
    seq: &DependenceSequence,
    window: &LagWindow,
    bandwidth: &Bandwidth,
    omega: f64,
) -> Result<f64> {
    let lags = lags_in_window(seq, bandwidth)?;
    let coeffs: Vec<f64> = (0..=lags)
        .map(|k| window.eval(k as f64 / bandwidth.r_n) * seq.xi[k])
        .collect();
    Ok(cosine_sum(&coeffs, omega))
}

/// `f̂^{[d]}(ω)` from an already computed dependence sequence.
pub fn generalized_derivative_value(
    seq: &DependenceSequence,
    window: &LagWindow,
    bandwidth: &Bandwidth,
    d: u32,
    omega: f64,
) -> Result<f64> {
    let lags = lags_in_window(seq, bandwidth)?;
    let coeffs: Vec<f64> = (0..=lags)
        .map(|k| window.eval(k as f64 / bandwidth.r_n) * (k as f64).powi(d as i32) * seq.xi[k])
        .collect();
    Ok(cosine_sum(&coeffs, omega))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointInference {
    /// Plug-in bias `−C_w r_n^{−d} f̂^{[d]}(ω)`.
    pub bias_hat: f64,
    /// Asymptotic standard error `sqrt(σ̂² r_n / n)` of `f̂(ω)`.
    pub se: f64,
    /// Standard error used for the interval half-width; differs from `se`
    /// when the interval is bias corrected.
    pub se_interval: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `|f̂_ρ(ω)|` fell below the degeneracy floor.
    pub degenerate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub omega: f64,
    pub f_hat: f64,
    pub inference: Option<PointInference>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub kind: MeasureKind,
    pub window: LagWindow,
    pub bandwidth: Bandwidth,
    pub n: usize,
    pub tie_warning: bool,
    pub points: Vec<SpectralPoint>,
}

impl SpectralEstimate {
    pub fn omegas(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.omega).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.f_hat).collect()
    }

    fn same_grid(&self, omegas: &[f64]) -> bool {
        self.points.len() == omegas.len()
            && self.points.iter().zip(omegas).all(|(p, w)| p.omega == *w)
    }
}

/// Lag-window estimate on `grid` from a precomputed dependence sequence.
pub fn estimate_from_sequence(
    seq: &DependenceSequence,
    window: &LagWindow,
    bandwidth: &Bandwidth,
    grid: &FrequencyGrid,
) -> Result<SpectralEstimate> {
    let points = grid
        .omegas()
        .iter()
        .map(|&omega| {
            Ok(SpectralPoint {
                omega,
                f_hat: lag_window_value(seq, window, bandwidth, omega)?,
                inference: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralEstimate {
        kind: seq.kind,
        window: *window,
        bandwidth: *bandwidth,
        n: seq.n,
        tie_warning: seq.tie_warning,
        points,
    })
}

/// U-lag-window estimate `f̂_{n,ξ}` on `grid`, without inference.
pub fn estimate_spectrum(
    series: &TimeSeries,
    kind: MeasureKind,
    window: &LagWindow,
    bandwidth: &Bandwidth,
    grid: &FrequencyGrid,
) -> Result<SpectralEstimate> {
    bandwidth.check_for(series.len())?;
    let seq = dependence_sequence(series, kind, bandwidth.max_lag())?;
    estimate_from_sequence(&seq, window, bandwidth, grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneralizedDerivative {
    pub d: u32,
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
}

/// Plug-in `f̂^{[d]}` truncated with the estimate's own window and bandwidth.
pub fn generalized_derivative(
    seq: &DependenceSequence,
    window: &LagWindow,
    bandwidth: &Bandwidth,
    d: u32,
    grid: &FrequencyGrid,
) -> Result<GeneralizedDerivative> {
    if d == 0 {
        return Err(Error::InvalidParameter("derivative order must be at least 1".into()));
    }
    let values = grid
        .omegas()
        .iter()
        .map(|&w| generalized_derivative_value(seq, window, bandwidth, d, w))
        .collect::<Result<Vec<_>>>()?;
    Ok(GeneralizedDerivative { d, omegas: grid.omegas().to_vec(), values })
}

/// Interval centering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Centering {
    /// `f̂ − bias_hat`, matching the centering of the limit law.
    BiasCorrected,
    /// `f̂` itself.
    Raw,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InferenceOptions {
    pub alpha: f64,
    pub degeneracy_floor: f64,
    pub centering: Centering,
}

impl Default for InferenceOptions {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            degeneracy_floor: DEFAULT_DEGENERACY_FLOOR,
            centering: Centering::BiasCorrected,
        }
    }
}

/// `c_ξ (1 + I(ω ∈ {0, π})) f_ref(ω)² ∫w²`.
pub fn asymptotic_variance(kind: MeasureKind, window: &LagWindow, f_ref: f64, omega: f64) -> f64 {
    let boundary = if is_boundary_frequency(omega) { 2.0 } else { 1.0 };
    kind.variance_factor() * boundary * f_ref * f_ref * window.w2_integral()
}

/// Fills in bias, standard errors, intervals and degeneracy flags.
///
/// `reference` is the Spearman-ρ estimate for τ and ρ targets, and the
/// estimate itself (or an identical covariance estimate) for covariance
/// targets. All three inputs must share the same frequency grid.
pub fn infer(
    estimate: &SpectralEstimate,
    reference: &SpectralEstimate,
    derivative: &GeneralizedDerivative,
    options: &InferenceOptions,
) -> Result<SpectralEstimate> {
    if !(options.alpha > 0.0 && options.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must be in (0,1), got {}", options.alpha)));
    }
    let expected = estimate.kind.variance_reference();
    if reference.kind != expected {
        return Err(Error::Mismatch(format!(
            "variance reference for {} must be a {} estimate, got {}",
            estimate.kind, expected, reference.kind
        )));
    }
    let omegas = estimate.omegas();
    if !reference.same_grid(&omegas) || derivative.omegas != omegas {
        return Err(Error::GridMismatch);
    }

    let window = estimate.window;
    let r_n = estimate.bandwidth.r_n;
    let n = estimate.n as f64;
    let d = derivative.d as i32;
    let z = Normal::standard().inverse_cdf(1.0 - options.alpha / 2.0);
    let widening = match options.centering {
        Centering::BiasCorrected => (window.corrected_w2_integral() / window.w2_integral()).sqrt(),
        Centering::Raw => 1.0,
    };

    let mut out = estimate.clone();
    for ((point, reference), fd) in out.points.iter_mut().zip(&reference.points).zip(&derivative.values) {
        let f_ref = reference.f_hat;
        let sigma2 = asymptotic_variance(estimate.kind, &window, f_ref, point.omega);
        let se = (sigma2 * r_n / n).sqrt();
        let bias_hat = -window.c_w() * r_n.powi(-d) * fd;
        let center = match options.centering {
            Centering::BiasCorrected => point.f_hat - bias_hat,
            Centering::Raw => point.f_hat,
        };
        let se_interval = se * widening;
        point.inference = Some(PointInference {
            bias_hat,
            se,
            se_interval,
            ci_low: center - z * se_interval,
            ci_high: center + z * se_interval,
            degenerate: f_ref.abs() < options.degeneracy_floor,
        });
    }
    Ok(out)
}

/// Estimate plus inference at a fixed bandwidth, computing the Spearman
/// reference sequence internally when the target is τ.
pub fn estimate_with_inference(
    series: &TimeSeries,
    kind: MeasureKind,
    window: &LagWindow,
    bandwidth: &Bandwidth,
    grid: &FrequencyGrid,
    options: &InferenceOptions,
) -> Result<SpectralEstimate> {
    bandwidth.check_for(series.len())?;
    let seq = dependence_sequence(series, kind, bandwidth.max_lag())?;
    let estimate = estimate_from_sequence(&seq, window, bandwidth, grid)?;
    let reference = if kind.variance_reference() == kind {
        estimate.clone()
    } else {
        let ref_seq = dependence_sequence(series, kind.variance_reference(), bandwidth.max_lag())?;
        estimate_from_sequence(&ref_seq, window, bandwidth, grid)?
    };
    let derivative = generalized_derivative(&seq, window, bandwidth, window.exponent(), grid)?;
    infer(&estimate, &reference, &derivative, options)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fallback {
    /// The bias constant or the variance collapsed to (numerically) zero.
    Degenerate,
    /// The pilot `f̂^{[d]}(ω)` is within noise of zero.
    BiasNotIdentified,
    /// The pilot bandwidth has no nonzero lag.
    PilotTooNarrow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthOptions {
    pub pilot_factor: f64,
    /// Fall back when `|f̂^{[d]}(ω)|` is below this many of its standard
    /// errors. Zero disables the check.
    pub significance: f64,
}

impl Default for BandwidthOptions {
    fn default() -> Self {
        Self { pilot_factor: 1.0, significance: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandwidthSelection {
    pub bandwidth: Bandwidth,
    pub fallback: Option<Fallback>,
    pub pilot_r_n: f64,
    /// `b̂ = −C_w f̂^{[d]}(ω)` at the pilot bandwidth.
    pub bias_constant: f64,
    /// `σ̂²` at the pilot bandwidth.
    pub sigma2: f64,
    /// Standard error of the pilot `f̂^{[d]}(ω)`.
    pub derivative_se: f64,
}

/// Smallest series length accepted by [`select_bandwidth`].
pub const MIN_PLUGIN_LEN: usize = 50;

/// Two-stage plug-in bandwidth minimizing the asymptotic MSE at `omega`:
/// `r_n = (2d b̂² n / σ̂²)^{1/(2d+1)}`, clamped to `[2, √n / ln n]`.
pub fn select_bandwidth(
    series: &TimeSeries,
    kind: MeasureKind,
    window: &LagWindow,
    omega: f64,
    options: &BandwidthOptions,
) -> Result<BandwidthSelection> {
    let n = series.len();
    if n < MIN_PLUGIN_LEN {
        return Err(Error::SeriesTooShort { len: n, min: MIN_PLUGIN_LEN });
    }
    if !(options.pilot_factor.is_finite() && options.pilot_factor > 0.0) {
        return Err(Error::InvalidParameter("pilot factor must be positive".into()));
    }
    let nf = n as f64;
    let d = window.exponent();
    let rate = 1.0 / (2 * d + 1) as f64;
    let fallback_r = nf.powf(rate);
    let pilot = Bandwidth::new(options.pilot_factor * nf.powf(rate), BandwidthOrigin::Plugin)?;
    pilot.check_for(n)?;

    let finish = |r_n: f64, fallback, b: f64, sigma2: f64, se: f64| {
        Ok(BandwidthSelection {
            bandwidth: Bandwidth::new(r_n, BandwidthOrigin::Plugin)?,
            fallback,
            pilot_r_n: pilot.r_n,
            bias_constant: b,
            sigma2,
            derivative_se: se,
        })
    };
    if pilot.max_lag() == 0 {
        return finish(fallback_r, Some(Fallback::PilotTooNarrow), 0.0, f64::NAN, f64::NAN);
    }

    let seq = dependence_sequence(series, kind, pilot.max_lag())?;
    let reference = if kind.variance_reference() == kind {
        seq.clone()
    } else {
        dependence_sequence(series, kind.variance_reference(), pilot.max_lag())?
    };
    let fd = generalized_derivative_value(&seq, window, &pilot, d, omega)?;
    let f_ref = lag_window_value(&reference, window, &pilot, omega)?;
    let b = -window.c_w() * fd;
    let sigma2 = asymptotic_variance(kind, window, f_ref, omega);

    // Var f̂^{[d]}(ω) ≈ σ²-constant × Σ_{|k|≤r} w(k/r)² |k|^{2d} / n, the same
    // approximation that gives σ² r_n / n for f̂ itself.
    let boundary = if is_boundary_frequency(omega) { 2.0 } else { 1.0 };
    let spread: f64 = (1..=pilot.max_lag())
        .map(|k| 2.0 * (window.eval(k as f64 / pilot.r_n) * (k as f64).powi(d as i32)).powi(2))
        .sum();
    let derivative_se =
        (kind.variance_factor() * boundary * f_ref * f_ref * spread / nf).sqrt();

    if b * b < 1e-12 || sigma2 < 1e-12 {
        return finish(fallback_r, Some(Fallback::Degenerate), b, sigma2, derivative_se);
    }
    if fd.abs() < options.significance * derivative_se {
        return finish(fallback_r, Some(Fallback::BiasNotIdentified), b, sigma2, derivative_se);
    }
    let optimal = (2.0 * d as f64 * b * b * nf / sigma2).powf(rate);
    let upper = (nf.sqrt() / nf.ln()).max(2.0);
    finish(optimal.clamp(2.0, upper), None, b, sigma2, derivative_se)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn uniform_series(n: usize, seed: u64) -> TimeSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        TimeSeries::new((0..n).map(|_| rng.random::<f64>()).collect()).unwrap()
    }

    fn seq(kind: MeasureKind, xi: Vec<f64>) -> DependenceSequence {
        DependenceSequence { kind, n: 100, xi, tie_warning: false }
    }

    fn flat(kind: MeasureKind, c: f64, window: LagWindow, r: f64, omegas: &[f64]) -> SpectralEstimate {
        SpectralEstimate {
            kind,
            window,
            bandwidth: Bandwidth::user(r).unwrap(),
            n: 400,
            tie_warning: false,
            points: omegas.iter().map(|&omega| SpectralPoint { omega, f_hat: c, inference: None }).collect(),
        }
    }

    #[test]
    fn grid_construction() {
        let g = FrequencyGrid::uniform(8).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g.omegas()[0], 0.0);
        assert_eq!(g.omegas()[8], PI);
        assert!(FrequencyGrid::new(vec![-PI]).is_err());
        assert!(FrequencyGrid::new(vec![0.5, 0.1]).is_err());
        assert!(FrequencyGrid::new(vec![-1.0, 0.0, PI]).is_ok());
    }

    #[test]
    fn zero_lag_only_is_flat() {
        let s = uniform_series(50, 1);
        let bw = Bandwidth::user(0.7).unwrap();
        let grid = FrequencyGrid::uniform(16).unwrap();
        for kind in [MeasureKind::KendallTau, MeasureKind::SpearmanRho] {
            let est = estimate_spectrum(&s, kind, &LagWindow::PARZEN, &bw, &grid).unwrap();
            for p in &est.points {
                assert!((p.f_hat - 1.0 / (2.0 * PI)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn cosine_form_matches_complex_sum() {
        let s = uniform_series(120, 9);
        let bw = Bandwidth::user(6.5).unwrap();
        let seq = dependence_sequence(&s, MeasureKind::KendallTau, 6).unwrap();
        for omega in [0.0, 0.3, 1.2, -2.0, PI] {
            let fast = lag_window_value(&seq, &LagWindow::BARTLETT, &bw, omega).unwrap();
            // literal (1/2π) Σ_{|k|<n} w_n(k) ξ_{n,|k|} e^{-ikω}
            let (mut re, mut im) = (0.0, 0.0);
            for k in -(s.len() as i64 - 1)..s.len() as i64 {
                let w = LagWindow::BARTLETT.eval(k as f64 / bw.r_n);
                if w == 0.0 {
                    continue;
                }
                let xi = seq.at(k).unwrap();
                re += w * xi * (k as f64 * omega).cos();
                im -= w * xi * (k as f64 * omega).sin();
            }
            assert!((fast - re / (2.0 * PI)).abs() < 1e-12);
            assert!(im.abs() < 1e-12);
        }
    }

    #[test]
    fn estimate_is_even_in_frequency() {
        let s = uniform_series(200, 4);
        let bw = Bandwidth::user(5.3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let omegas: Vec<f64> = (0..50).map(|_| rng.random_range(0.0..PI)).collect();
        let seq = dependence_sequence(&s, MeasureKind::SpearmanRho, 5).unwrap();
        for w in omegas {
            let a = lag_window_value(&seq, &LagWindow::TUKEY_HANNING, &bw, w).unwrap();
            let b = lag_window_value(&seq, &LagWindow::TUKEY_HANNING, &bw, -w).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn estimate_rejects_wide_bandwidth() {
        let s = uniform_series(10, 2);
        let bw = Bandwidth::user(7.0).unwrap();
        let grid = FrequencyGrid::single(0.0).unwrap();
        assert!(matches!(
            estimate_spectrum(&s, MeasureKind::KendallTau, &LagWindow::PARZEN, &bw, &grid),
            Err(Error::BandwidthTooLarge { .. })
        ));
    }

    #[test]
    fn derivative_examples() {
        let grid = FrequencyGrid::uniform(8).unwrap();
        let bw = Bandwidth::user(2.0).unwrap();
        let zero_tail = seq(MeasureKind::KendallTau, vec![1.0, 0.0, 0.0]);
        let g = generalized_derivative(&zero_tail, &LagWindow::BARTLETT, &bw, 1, &grid).unwrap();
        assert!(g.values.iter().all(|&v| v == 0.0));

        let a = 0.3;
        let single = seq(MeasureKind::KendallTau, vec![1.0, a, 0.0]);
        let g = generalized_derivative(&single, &LagWindow::BARTLETT, &bw, 1, &grid).unwrap();
        for (w, v) in grid.omegas().iter().zip(&g.values) {
            let expected = a * w.cos() / (2.0 * PI) * 2.0 * 0.5;
            assert!((v - expected).abs() < 1e-15);
            let neg = generalized_derivative_value(&single, &LagWindow::BARTLETT, &bw, 1, -w).unwrap();
            assert_eq!(*v, neg);
        }
        assert!(generalized_derivative(&single, &LagWindow::BARTLETT, &bw, 0, &grid).is_err());
    }

    fn variance_at(kind: MeasureKind, c: f64, omega: f64) -> f64 {
        let omegas = [omega];
        let est = flat(kind, 0.2, LagWindow::BARTLETT, 4.0, &omegas);
        let reference = flat(MeasureKind::SpearmanRho, c, LagWindow::BARTLETT, 4.0, &omegas);
        let deriv = GeneralizedDerivative { d: 1, omegas: omegas.to_vec(), values: vec![0.0] };
        let out = infer(&est, &reference, &deriv, &InferenceOptions::default()).unwrap();
        let se = out.points[0].inference.unwrap().se;
        se * se * 400.0 / 4.0
    }

    #[test]
    fn variance_constants() {
        let c = 0.25;
        let v = variance_at(MeasureKind::KendallTau, c, PI / 2.0);
        assert!((v - 8.0 * c * c / 27.0).abs() < 1e-15);
        let v = variance_at(MeasureKind::KendallTau, c, PI);
        assert!((v - 16.0 * c * c / 27.0).abs() < 1e-15);
        let v = variance_at(MeasureKind::KendallTau, c, 0.0);
        assert!((v - 16.0 * c * c / 27.0).abs() < 1e-15);
        let v = variance_at(MeasureKind::SpearmanRho, c, PI / 2.0);
        assert!((v - 2.0 * c * c / 3.0).abs() < 1e-15);
        let v = variance_at(MeasureKind::SpearmanRho, c, -PI + 1e-10);
        assert!((v - 4.0 * c * c / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tau_interval_is_two_thirds_of_rho_interval() {
        let omegas = [0.4, PI / 2.0, 2.0];
        let reference = flat(MeasureKind::SpearmanRho, 0.17, LagWindow::PARZEN, 5.0, &omegas);
        let tau = flat(MeasureKind::KendallTau, 0.12, LagWindow::PARZEN, 5.0, &omegas);
        let deriv = GeneralizedDerivative { d: 2, omegas: omegas.to_vec(), values: vec![0.1, -0.2, 0.05] };
        let opts = InferenceOptions { alpha: 0.1, ..Default::default() };
        let t = infer(&tau, &reference, &deriv, &opts).unwrap();
        let r = infer(&reference, &reference, &deriv, &opts).unwrap();
        for (a, b) in t.points.iter().zip(&r.points) {
            let (a, b) = (a.inference.unwrap(), b.inference.unwrap());
            let ratio = (a.ci_high - a.ci_low) / (b.ci_high - b.ci_low);
            assert!((ratio - 2.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interval_construction() {
        let omegas = [1.0];
        let est = flat(MeasureKind::SpearmanRho, 0.2, LagWindow::PARZEN, 4.0, &omegas);
        let deriv = GeneralizedDerivative { d: 2, omegas: vec![1.0], values: vec![0.8] };
        let raw = InferenceOptions { centering: Centering::Raw, alpha: 0.1, ..Default::default() };
        let out = infer(&est, &est, &deriv, &raw).unwrap();
        let inf = out.points[0].inference.unwrap();
        assert!((inf.bias_hat + 6.0 / 16.0 * 0.8).abs() < 1e-15);
        assert_eq!(inf.se, inf.se_interval);
        assert!(((inf.ci_low + inf.ci_high) / 2.0 - 0.2).abs() < 1e-15);
        let z = (inf.ci_high - 0.2) / inf.se;
        assert!((z - 1.6448536269514722).abs() < 1e-9);

        let out = infer(&est, &est, &deriv, &InferenceOptions::default()).unwrap();
        let inf = out.points[0].inference.unwrap();
        assert!(((inf.ci_low + inf.ci_high) / 2.0 - (0.2 - inf.bias_hat)).abs() < 1e-15);
        assert!(inf.se_interval > inf.se);
        assert!(!inf.degenerate);
    }

    #[test]
    fn degenerate_flag_and_input_errors() {
        let omegas = [0.5, 1.5];
        let est = flat(MeasureKind::KendallTau, 0.1, LagWindow::BARTLETT, 3.0, &omegas);
        let tiny = flat(MeasureKind::SpearmanRho, 5e-4, LagWindow::BARTLETT, 3.0, &omegas);
        let deriv = GeneralizedDerivative { d: 1, omegas: omegas.to_vec(), values: vec![0.0, 0.0] };
        let out = infer(&est, &tiny, &deriv, &InferenceOptions::default()).unwrap();
        assert!(out.points.iter().all(|p| p.inference.unwrap().degenerate));

        let bad_alpha = InferenceOptions { alpha: 1.0, ..Default::default() };
        assert!(infer(&est, &tiny, &deriv, &bad_alpha).is_err());
        assert!(matches!(
            infer(&est, &est, &deriv, &InferenceOptions::default()),
            Err(Error::Mismatch(_))
        ));
        let other = flat(MeasureKind::SpearmanRho, 0.1, LagWindow::BARTLETT, 3.0, &[0.5, 1.6]);
        assert_eq!(infer(&est, &other, &deriv, &InferenceOptions::default()), Err(Error::GridMismatch));
    }

    #[test]
    fn optimal_bandwidth_formula() {
        // the plug-in rule itself, with b² / σ² fed in directly
        let r = |d: f64, ratio: f64, n: f64| (2.0 * d * ratio * n).powf(1.0 / (2.0 * d + 1.0));
        assert!((r(2.0, 1.0, 1000.0) - 4000f64.powf(0.2)).abs() < 1e-12);
        assert!((r(2.0, 0.25, 3125.0) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn bandwidth_falls_back_on_white_noise() {
        let opts = BandwidthOptions::default();
        let mut flagged = 0;
        for seed in 0..40 {
            let s = uniform_series(1000, seed);
            let sel = select_bandwidth(&s, MeasureKind::KendallTau, &LagWindow::PARZEN, PI / 2.0, &opts)
                .unwrap();
            assert_eq!(sel.bandwidth.origin, BandwidthOrigin::Plugin);
            if sel.fallback.is_some() {
                flagged += 1;
                assert!((sel.bandwidth.r_n - 1000f64.powf(0.2)).abs() < 1e-12);
            }
        }
        assert!(flagged >= 32, "only {flagged}/40 white-noise series fell back");

        let tiny = uniform_series(40, 1);
        assert!(select_bandwidth(&tiny, MeasureKind::KendallTau, &LagWindow::PARZEN, 0.0, &opts).is_err());
    }

    #[test]
    fn bandwidth_on_monotone_trend_is_clamped() {
        // every ξ_k = 1, so f̂^{[d]} is large and the clamp binds
        let s = TimeSeries::new((0..400).map(|t| t as f64).collect()).unwrap();
        let sel = select_bandwidth(&s, MeasureKind::SpearmanRho, &LagWindow::PARZEN, 1.0,
            &BandwidthOptions { significance: 0.0, ..Default::default() }).unwrap();
        assert!(sel.fallback.is_none());
        let upper = 20.0 / 400f64.ln();
        assert!(sel.bandwidth.r_n >= 2.0 && sel.bandwidth.r_n <= upper + 1e-12);
    }
}
