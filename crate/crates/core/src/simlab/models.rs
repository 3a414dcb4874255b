use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::dependence::MeasureKind;
use crate::error::{Error, Result};
use crate::series::TimeSeries;
use crate::spectral::FrequencyGrid;

/// Strictly increasing transform applied to a Gaussian AR(1) path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MarginalTransform {
    Identity,
    /// `exp(x)`: lognormal marginals.
    Exp,
    /// `x³`.
    Cube,
    /// `Φ(x / sd)`: uniform marginals.
    Uniform,
}

impl MarginalTransform {
    pub fn name(self) -> &'static str {
        match self {
            MarginalTransform::Identity => "identity",
            MarginalTransform::Exp => "exp",
            MarginalTransform::Cube => "cube",
            MarginalTransform::Uniform => "uniform",
        }
    }

    fn apply(self, x: f64, sd: f64) -> f64 {
        match self {
            MarginalTransform::Identity => x,
            MarginalTransform::Exp => x.exp(),
            MarginalTransform::Cube => x * x * x,
            MarginalTransform::Uniform => Normal::standard().cdf(x / sd),
        }
    }
}

impl FromStr for MarginalTransform {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(MarginalTransform::Identity),
            "exp" | "lognormal" => Ok(MarginalTransform::Exp),
            "cube" => Ok(MarginalTransform::Cube),
            "uniform" => Ok(MarginalTransform::Uniform),
            other => Err(Error::InvalidParameter(format!("unknown marginal transform `{other}`"))),
        }
    }
}

/// Stationary processes with closed-form lag dependence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum SimulationModel {
    IidUniform,
    GaussianAr1 { phi: f64 },
    GaussianCopulaAr1 { phi: f64, marginal: MarginalTransform },
}

fn check_phi(phi: f64) -> Result<f64> {
    if phi.is_finite() && phi.abs() < 1.0 {
        Ok(phi)
    } else {
        Err(Error::InvalidParameter(format!("AR(1) coefficient must satisfy |phi| < 1, got {phi}")))
    }
}

impl SimulationModel {
    pub fn gaussian_ar1(phi: f64) -> Result<Self> {
        Ok(SimulationModel::GaussianAr1 { phi: check_phi(phi)? })
    }

    pub fn gaussian_copula_ar1(phi: f64, marginal: MarginalTransform) -> Result<Self> {
        Ok(SimulationModel::GaussianCopulaAr1 { phi: check_phi(phi)?, marginal })
    }

    /// Parses `iid-uniform`, `gaussian-ar1` or `gaussian-copula-ar1`.
    pub fn from_name(name: &str, phi: f64, marginal: MarginalTransform) -> Result<Self> {
        match name {
            "iid-uniform" => Ok(SimulationModel::IidUniform),
            "gaussian-ar1" => Self::gaussian_ar1(phi),
            "gaussian-copula-ar1" | "gaussian-copula-ar1-with-marginal" => {
                Self::gaussian_copula_ar1(phi, marginal)
            }
            other => Err(Error::UnsupportedModel(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SimulationModel::IidUniform => "iid-uniform",
            SimulationModel::GaussianAr1 { .. } => "gaussian-ar1",
            SimulationModel::GaussianCopulaAr1 { .. } => "gaussian-copula-ar1",
        }
    }

    pub fn phi(&self) -> f64 {
        match *self {
            SimulationModel::IidUniform => 0.0,
            SimulationModel::GaussianAr1 { phi } | SimulationModel::GaussianCopulaAr1 { phi, .. } => phi,
        }
    }

    /// Closed-form `ξ_k`. Covariances are only available when the marginal
    /// is known in closed form (uniform, or the untransformed Gaussian).
    pub fn true_lag(&self, kind: MeasureKind, k: usize) -> Result<f64> {
        let correlation = match self {
            SimulationModel::IidUniform => (k == 0) as i32 as f64,
            _ => self.phi().powi(k as i32),
        };
        match (kind, self) {
            (MeasureKind::KendallTau, _) => Ok(2.0 / PI * correlation.asin()),
            (MeasureKind::SpearmanRho, SimulationModel::IidUniform) => Ok(correlation),
            (MeasureKind::SpearmanRho, _) => Ok(6.0 / PI * (correlation / 2.0).asin()),
            (MeasureKind::Covariance, SimulationModel::IidUniform) => Ok(correlation / 12.0),
            (MeasureKind::Covariance, SimulationModel::GaussianAr1 { phi })
            | (
                MeasureKind::Covariance,
                SimulationModel::GaussianCopulaAr1 { phi, marginal: MarginalTransform::Identity },
            ) => Ok(correlation / (1.0 - phi * phi)),
            (MeasureKind::Covariance, _) => Err(Error::UnsupportedModel(format!(
                "no closed-form autocovariance for {}",
                self.name()
            ))),
        }
    }

    /// `C` such that `|ξ_k| ≤ C |φ|^k` for `k ≥ 1`.
    fn envelope(&self, kind: MeasureKind) -> f64 {
        let phi = self.phi();
        match kind {
            // |arcsin x| ≤ (π/2)|x|
            MeasureKind::KendallTau => 1.0,
            MeasureKind::SpearmanRho => 1.5,
            MeasureKind::Covariance => 1.0 / (1.0 - phi * phi),
        }
    }
}

impl fmt::Display for SimulationModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimulationModel::IidUniform => f.write_str("iid-uniform"),
            SimulationModel::GaussianAr1 { phi } => write!(f, "gaussian-ar1(phi={phi})"),
            SimulationModel::GaussianCopulaAr1 { phi, marginal } => {
                write!(f, "gaussian-copula-ar1(phi={phi}, marginal={})", marginal.name())
            }
        }
    }
}

/// Smallest length accepted by [`simulate`].
pub const MIN_SIMULATION_LEN: usize = 8;

/// Draws `n` observations. The Gaussian AR(1) starts from its stationary
/// law `N(0, 1/(1 − φ²))`; the copula model applies its transform to the
/// same path, so both give identical ranks for a given seed.
pub fn simulate(model: &SimulationModel, n: usize, seed: u64) -> Result<TimeSeries> {
    if n < MIN_SIMULATION_LEN {
        return Err(Error::SeriesTooShort { len: n, min: MIN_SIMULATION_LEN });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = match *model {
        SimulationModel::IidUniform => (0..n).map(|_| rng.random::<f64>()).collect(),
        SimulationModel::GaussianAr1 { phi } => ar1_path(&mut rng, check_phi(phi)?, n),
        SimulationModel::GaussianCopulaAr1 { phi, marginal } => {
            let phi = check_phi(phi)?;
            let sd = (1.0 - phi * phi).sqrt().recip();
            let mut path = ar1_path(&mut rng, phi, n);
            path.iter_mut().for_each(|x| *x = marginal.apply(*x, sd));
            path
        }
    };
    TimeSeries::new(values)
}

fn ar1_path(rng: &mut ChaCha8Rng, phi: f64, n: usize) -> Vec<f64> {
    let mut x = rng.sample::<f64, _>(StandardNormal) / (1.0 - phi * phi).sqrt();
    let mut out = Vec::with_capacity(n);
    out.push(x);
    for _ in 1..n {
        x = phi * x + rng.sample::<f64, _>(StandardNormal);
        out.push(x);
    }
    out
}

/// Model spectrum `f_ξ(ω)` (and optionally its generalized derivative) on a
/// grid, from the closed-form lag sequence truncated at `truncation_lag`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrueSpectrum {
    pub kind: MeasureKind,
    pub omegas: Vec<f64>,
    pub values: Vec<f64>,
    pub truncation_lag: usize,
}

const MAX_TRUTH_LAGS: usize = 1_000_000;

/// Lag sequence `|k|^d ξ_k`, `k = 0, …, K`, where `K` is the first lag at
/// which the geometric bound on the remaining tail of
/// `(1/π) Σ_{j>K} j^d |ξ_j|` drops below `tail_tol`.
fn truncated_coefficients(
    model: &SimulationModel,
    kind: MeasureKind,
    d: u32,
    tail_tol: f64,
) -> Result<Vec<f64>> {
    if tail_tol.is_nan() || tail_tol <= 0.0 {
        return Err(Error::InvalidParameter("tail tolerance must be positive".into()));
    }
    let weight = |k: usize| if d == 0 { 1.0 } else { (k as f64).powi(d as i32) };
    let mut coeffs = vec![weight(0) * model.true_lag(kind, 0)?];
    let q = model.phi().abs();
    if q == 0.0 {
        return Ok(coeffs);
    }
    let c = model.envelope(kind);
    for k in 1..MAX_TRUTH_LAGS {
        coeffs.push(weight(k) * model.true_lag(kind, k)?);
        // terms beyond k are bounded by c j^d q^j with ratio at most
        // q ((k+2)/(k+1))^d, so the tail is a dominated geometric series
        let next = c * weight(k + 1) * q.powi(k as i32 + 1);
        let ratio = q * ((k + 2) as f64 / (k + 1) as f64).powi(d as i32);
        if ratio < 1.0 && next / (1.0 - ratio) / PI < tail_tol {
            return Ok(coeffs);
        }
    }
    Err(Error::InvalidParameter("lag series did not converge".into()))
}

/// `f_ξ(ω) = (1/2π)[ξ_0 + 2 Σ_{k≥1} ξ_k cos kω]` for the model's `ξ_k`.
pub fn true_spectrum(
    model: &SimulationModel,
    kind: MeasureKind,
    grid: &FrequencyGrid,
    tail_tol: f64,
) -> Result<TrueSpectrum> {
    true_generalized_derivative(model, kind, 0, grid, tail_tol)
}

/// `f^{[d]}(ω) = (1/2π) Σ_k |k|^d ξ_k e^{−ikω}`; `d = 0` gives the spectrum.
pub fn true_generalized_derivative(
    model: &SimulationModel,
    kind: MeasureKind,
    d: u32,
    grid: &FrequencyGrid,
    tail_tol: f64,
) -> Result<TrueSpectrum> {
    let coeffs = truncated_coefficients(model, kind, d, tail_tol)?;
    let values = grid.omegas().iter().map(|&w| crate::spectral::cosine_sum(&coeffs, w)).collect();
    Ok(TrueSpectrum {
        kind,
        omegas: grid.omegas().to_vec(),
        values,
        truncation_lag: coeffs.len() - 1,
    })
}

/// Exact mean of the lag-window sum with the model's `ξ_k` in place of the
/// estimates: `(1/2π) Σ_{|k|≤r} w(k/r) ξ_k e^{−ikω}`.
pub fn windowed_truth(
    model: &SimulationModel,
    kind: MeasureKind,
    window: &crate::windows::LagWindow,
    r_n: f64,
    omega: f64,
) -> Result<f64> {
    let lags = r_n.floor() as usize;
    let coeffs = (0..=lags)
        .map(|k| Ok(window.eval(k as f64 / r_n) * model.true_lag(kind, k)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(crate::spectral::cosine_sum(&coeffs, omega))
}
