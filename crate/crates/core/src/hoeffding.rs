//! Hoeffding decomposition of the lag U-statistics under analytic pair laws.
//!
//! For a kernel `h` of order `m` with mean `ξ` under the pair law `F_k`,
//! the projections are defined recursively,
//!
//! ```text
//! h_1(z1)         = E h(z1, Z2, …) − ξ
//! h_2(z1, z2)     = E h(z1, z2, Z3, …) − h_1(z1) − h_1(z2) − ξ
//! h_3(z1, z2, z3) = h − Σ h_2 − Σ h_1 − ξ
//! ```
//!
//! and `U(h) − ξ = Σ_c C(m, c) U^{(c)}(h_c)` holds exactly for any sample.
//! Rank kernels are evaluated on the copula scale `(u, v) = (F(x), F(y))`,
//! where they depend on `F_k` only through
//!
//! ```text
//! A(u, v)  = E[sgn(u − U) sgn(v − V)] = 1 − 2u − 2v + 4 C(u, v)
//! B_x(u)   = E[sgn(U − u) (2V − 1)]
//! B_y(v)   = E[(2U − 1) sgn(V − v)]
//! ```

use std::f64::consts::PI;

use serde::Serialize;
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::dependence::enumerate::{binomial, rho_kernel};
use crate::dependence::rank::sign;
use crate::dependence::{lag_estimate, lag_pairs, MeasureKind, Pair};
use crate::error::{Error, Result};
use crate::quadrature::integrate;
use crate::series::TimeSeries;
use crate::simlab::stats::{log_log_slope, neumaier_sum, Moments};
use crate::simlab::{run_replicates, simulate, MarginalTransform, SimulationModel};

/// Absolute tolerance of the one-dimensional Gaussian-copula integrals.
const QUAD_TOL: f64 = 1e-13;

/// Integration range in standard-normal units.
const NORMAL_LIMIT: f64 = 9.0;

/// Largest series length decomposed with an order-3 kernel.
pub const MAX_CUBIC_LEN: usize = 500;

/// Largest series length in the decay experiment.
pub const MAX_DECAY_LEN: usize = 1000;

/// Copula of the lag pair `(X_0, X_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "law", rename_all = "kebab-case")]
pub enum PairLaw {
    Independence,
    /// `X_k = X_0`; the law at lag 0.
    Comonotone,
    Gaussian { r: f64 },
}

/// Common marginal `F` of the process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "marginal", rename_all = "kebab-case")]
pub enum Marginal {
    Uniform,
    Normal { sd: f64 },
    LogNormal { sd: f64 },
    CubedNormal { sd: f64 },
}

impl Marginal {
    /// `F(x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        let phi = |z: f64| Normal::standard().cdf(z);
        match *self {
            Marginal::Uniform => x.clamp(0.0, 1.0),
            Marginal::Normal { sd } => phi(x / sd),
            Marginal::LogNormal { sd } => {
                if x > 0.0 {
                    phi(x.ln() / sd)
                } else {
                    0.0
                }
            }
            Marginal::CubedNormal { sd } => phi(x.cbrt() / sd),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoeffdingModel {
    pub kind: MeasureKind,
    pub law: PairLaw,
    pub marginal: Marginal,
    /// `ξ_k` under the pair law.
    pub xi_true: f64,
    /// Marginal mean and lag covariance; covariance kernels only.
    moments: Option<(f64, f64)>,
}

fn gaussian_tau(r: f64) -> f64 {
    2.0 / PI * r.asin()
}

fn gaussian_rho(r: f64) -> f64 {
    6.0 / PI * (r / 2.0).asin()
}

impl HoeffdingModel {
    pub fn new(kind: MeasureKind, law: PairLaw, marginal: Marginal) -> Result<Self> {
        if let PairLaw::Gaussian { r } = law {
            if r.is_nan() || r.abs() >= 1.0 {
                return Err(Error::InvalidParameter(format!("Gaussian copula needs |r| < 1, got {r}")));
            }
        }
        let (tau, rho) = match law {
            PairLaw::Independence => (0.0, 0.0),
            PairLaw::Comonotone => (1.0, 1.0),
            PairLaw::Gaussian { r } => (gaussian_tau(r), gaussian_rho(r)),
        };
        let (xi_true, moments) = match kind {
            MeasureKind::KendallTau => (tau, None),
            MeasureKind::SpearmanRho => (rho, None),
            MeasureKind::Covariance => {
                let (mean, gamma) = match (marginal, law) {
                    (Marginal::Uniform, _) => (0.5, rho / 12.0),
                    (Marginal::Normal { .. }, PairLaw::Independence) => (0.0, 0.0),
                    (Marginal::Normal { sd }, PairLaw::Comonotone) => (0.0, sd * sd),
                    (Marginal::Normal { sd }, PairLaw::Gaussian { r }) => (0.0, r * sd * sd),
                    _ => {
                        return Err(Error::UnsupportedModel(
                            "covariance projections need a uniform or normal marginal".into(),
                        ))
                    }
                };
                (gamma, Some((mean, gamma)))
            }
        };
        Ok(Self { kind, law, marginal, xi_true, moments })
    }

    /// Model of the lag-`k` pair of a simulated process.
    pub fn for_process(process: &SimulationModel, kind: MeasureKind, k: usize) -> Result<Self> {
        let (phi, marginal) = match *process {
            SimulationModel::IidUniform => {
                let law = if k == 0 { PairLaw::Comonotone } else { PairLaw::Independence };
                return Self::new(kind, law, Marginal::Uniform);
            }
            SimulationModel::GaussianAr1 { phi } => (phi, MarginalTransform::Identity),
            SimulationModel::GaussianCopulaAr1 { phi, marginal } => (phi, marginal),
        };
        let sd = (1.0 - phi * phi).sqrt().recip();
        let marginal = match marginal {
            MarginalTransform::Identity => Marginal::Normal { sd },
            MarginalTransform::Exp => Marginal::LogNormal { sd },
            MarginalTransform::Cube => Marginal::CubedNormal { sd },
            MarginalTransform::Uniform => Marginal::Uniform,
        };
        let r = phi.powi(k as i32);
        let law = if k == 0 {
            PairLaw::Comonotone
        } else if r == 0.0 {
            PairLaw::Independence
        } else {
            PairLaw::Gaussian { r }
        };
        Self::new(kind, law, marginal)
    }

    pub fn order(&self) -> usize {
        self.kind.order()
    }

    /// Copula `C(u, v)`.
    pub fn copula(&self, u: f64, v: f64) -> f64 {
        match self.law {
            PairLaw::Independence => u * v,
            PairLaw::Comonotone => u.min(v),
            PairLaw::Gaussian { r } => gaussian_copula(u, v, r),
        }
    }

    /// `A(u, v) = 1 − 2u − 2v + 4 C(u, v)`.
    pub fn concordance(&self, u: f64, v: f64) -> f64 {
        1.0 - 2.0 * u - 2.0 * v + 4.0 * self.copula(u, v)
    }

    /// `B_x(u) = E[sgn(U − u)(2V − 1)]`. Every supported copula is
    /// exchangeable, so this is also `B_y`.
    pub fn cross_moment(&self, u: f64) -> f64 {
        match self.law {
            PairLaw::Independence => 0.0,
            PairLaw::Comonotone => 2.0 * u * (1.0 - u),
            PairLaw::Gaussian { r } => gaussian_cross_moment(u, r),
        }
    }

    fn unit(&self, z: Pair) -> (f64, f64) {
        (self.marginal.cdf(z.0), self.marginal.cdf(z.1))
    }

    /// `h_{1,k}(x, y)`.
    pub fn h1(&self, x: f64, y: f64) -> f64 {
        match self.kind {
            MeasureKind::Covariance => {
                let (mu, gamma) = self.moments.expect("covariance model carries its moments");
                0.5 * ((x - mu) * (y - mu) - gamma)
            }
            MeasureKind::KendallTau => {
                let (u, v) = self.unit((x, y));
                self.concordance(u, v) - self.xi_true
            }
            MeasureKind::SpearmanRho => {
                let (u, v) = self.unit((x, y));
                (2.0 * u - 1.0) * (2.0 * v - 1.0) + self.cross_moment(u) + self.cross_moment(v)
                    - self.xi_true
            }
        }
    }

    /// `h_{2,k}(z1, z2)`.
    pub fn h2(&self, a: Pair, b: Pair) -> f64 {
        self.second_projection(a, b, self.h1(a.0, a.1), self.h1(b.0, b.1))
    }

    fn second_projection(&self, a: Pair, b: Pair, h1a: f64, h1b: f64) -> f64 {
        let g2 = match self.kind {
            MeasureKind::Covariance => 0.5 * (a.0 - b.0) * (a.1 - b.1),
            MeasureKind::KendallTau => (sign(a.0, b.0) * sign(a.1, b.1)) as f64,
            MeasureKind::SpearmanRho => {
                let (ua, va) = self.unit(a);
                let (ub, vb) = self.unit(b);
                let sx = sign(a.0, b.0) as f64;
                let sy = sign(a.1, b.1) as f64;
                0.5 * (self.concordance(ua, vb)
                    + self.concordance(ub, va)
                    + (2.0 * ua - 1.0) * sy
                    - (2.0 * ub - 1.0) * sy
                    + sx * (2.0 * va - 1.0)
                    - sx * (2.0 * vb - 1.0))
            }
        };
        g2 - h1a - h1b - self.xi_true
    }

    /// `h_{3,k}(z1, z2, z3)`; only defined for order-3 kernels.
    pub fn h3(&self, a: Pair, b: Pair, c: Pair) -> Result<f64> {
        if self.order() != 3 {
            return Err(Error::InvalidParameter(format!("{} has no third projection", self.kind)));
        }
        let (ha, hb, hc) = (self.h1(a.0, a.1), self.h1(b.0, b.1), self.h1(c.0, c.1));
        Ok(rho_kernel(a, b, c)
            - self.second_projection(a, b, ha, hb)
            - self.second_projection(a, c, ha, hc)
            - self.second_projection(b, c, hb, hc)
            - ha
            - hb
            - hc
            - self.xi_true)
    }
}

fn bivariate_normal_density(a: f64, b: f64, s: f64) -> f64 {
    let q = 1.0 - s * s;
    (-(a * a - 2.0 * s * a * b + b * b) / (2.0 * q)).exp() / (2.0 * PI * q.sqrt())
}

/// Gaussian copula via Plackett's identity
/// `Φ₂(a, b; r) = Φ(a)Φ(b) + ∫_0^r φ₂(a, b; s) ds`.
fn gaussian_copula(u: f64, v: f64, r: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 || v >= 1.0 {
        return u.min(v);
    }
    let normal = Normal::standard();
    let a = normal.inverse_cdf(u);
    let b = normal.inverse_cdf(v);
    let value = u * v + integrate(|s| bivariate_normal_density(a, b, s), 0.0, r, QUAD_TOL);
    value.clamp(0.0, u.min(v))
}

/// `B_x(u) = 2 ∫_{Φ⁻¹(u)}^∞ (2Φ(r x / sqrt(2 − r²)) − 1) φ(x) dx`, using
/// `E[Φ(Y) | X = x] = Φ(r x / sqrt(2 − r²))`.
fn gaussian_cross_moment(u: f64, r: f64) -> f64 {
    if u <= 0.0 || u >= 1.0 {
        return 0.0;
    }
    let normal = Normal::standard();
    let x0 = normal.inverse_cdf(u).clamp(-NORMAL_LIMIT, NORMAL_LIMIT);
    let scale = r / (2.0 - r * r).sqrt();
    let integrand = |x: f64| (2.0 * normal.cdf(scale * x) - 1.0) * normal.pdf(x);
    2.0 * integrate(integrand, x0, NORMAL_LIMIT, QUAD_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegeneratePart {
    pub c: usize,
    /// `U^{(c)}(h_{c,k})`.
    pub u_statistic: f64,
    /// `C(m, c) · U^{(c)}(h_{c,k})`.
    pub weighted: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub kind: MeasureKind,
    pub n: usize,
    pub k: usize,
    pub estimate: f64,
    pub xi_true: f64,
    /// `ξ_{n,k} − ξ_k`.
    pub total: f64,
    /// `(m / (n − k)) Σ_t h_{1,k}(X_t, X_{t+k})`.
    pub linear_part: f64,
    pub degenerate_parts: Vec<DegeneratePart>,
    /// `total − linear_part − Σ degenerate`.
    pub residual: f64,
}

/// Per-pair projections for one sample of lag pairs.
struct Projector<'a> {
    model: &'a HoeffdingModel,
    pairs: Vec<Pair>,
    h1: Vec<f64>,
}

impl<'a> Projector<'a> {
    fn new(model: &'a HoeffdingModel, pairs: Vec<Pair>) -> Self {
        let h1 = pairs.iter().map(|p| model.h1(p.0, p.1)).collect();
        Self { model, pairs, h1 }
    }

    fn h2(&self, i: usize, j: usize) -> f64 {
        self.model.second_projection(self.pairs[i], self.pairs[j], self.h1[i], self.h1[j])
    }

    /// `U^{(2)}(h_2)`.
    fn second_order(&self) -> f64 {
        let n = self.pairs.len();
        let mut terms = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in i + 1..n {
                terms.push(self.h2(i, j));
            }
        }
        neumaier_sum(terms) / binomial(n, 2)
    }

    /// `(U^{(2)}(h_2), U^{(3)}(h_3))` for order-3 kernels.
    fn second_and_third_order(&self) -> (f64, f64) {
        let n = self.pairs.len();
        let mut h2 = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = self.h2(i, j);
                h2[i * n + j] = v;
                h2[j * n + i] = v;
            }
        }
        let u2 = neumaier_sum((0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).map(|(i, j)| h2[i * n + j]))
            / binomial(n, 2);
        let xi = self.model.xi_true;
        let (p, h1) = (&self.pairs, &self.h1);
        let mut row_sums = Vec::with_capacity(n);
        for i in 0..n {
            let mut terms = Vec::new();
            for j in i + 1..n {
                for l in j + 1..n {
                    terms.push(
                        rho_kernel(p[i], p[j], p[l])
                            - h2[i * n + j]
                            - h2[i * n + l]
                            - h2[j * n + l]
                            - h1[i]
                            - h1[j]
                            - h1[l]
                            - xi,
                    );
                }
            }
            row_sums.push(neumaier_sum(terms));
        }
        (u2, neumaier_sum(row_sums) / binomial(n, 3))
    }
}

/// Decomposes `ξ_{n,k} − ξ_k` into its linear and degenerate parts by direct
/// enumeration. `model` must describe the lag-`k` pair law of `series`.
pub fn decompose(series: &TimeSeries, model: &HoeffdingModel, k: usize) -> Result<DecompositionReport> {
    let n = series.len();
    let m = model.order();
    if m == 3 && n > MAX_CUBIC_LEN {
        return Err(Error::SizeGuard(format!(
            "order-3 decomposition enumerates all triples; n = {n} exceeds {MAX_CUBIC_LEN}"
        )));
    }
    let estimate = lag_estimate(series, model.kind, k)?;
    let projector = Projector::new(model, lag_pairs(series.values(), k)?);
    let pairs = projector.pairs.len();
    let linear_part = m as f64 * neumaier_sum(projector.h1.iter().copied()) / pairs as f64;
    let degenerate_parts = if m == 2 {
        let u2 = projector.second_order();
        vec![DegeneratePart { c: 2, u_statistic: u2, weighted: u2 }]
    } else {
        let (u2, u3) = projector.second_and_third_order();
        vec![
            DegeneratePart { c: 2, u_statistic: u2, weighted: 3.0 * u2 },
            DegeneratePart { c: 3, u_statistic: u3, weighted: u3 },
        ]
    };
    let total = estimate - model.xi_true;
    let residual = total - linear_part - degenerate_parts.iter().map(|d| d.weighted).sum::<f64>();
    Ok(DecompositionReport {
        kind: model.kind,
        n,
        k,
        estimate,
        xi_true: model.xi_true,
        total,
        linear_part,
        degenerate_parts,
        residual,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayRow {
    pub n: usize,
    /// Mean of `[U^{(2)}(h_{2,k})]²` over replicates.
    pub mean_square: f64,
    /// Monte Carlo standard error of `mean_square`.
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayTable {
    pub process: SimulationModel,
    pub kind: MeasureKind,
    pub k: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub rows: Vec<DecayRow>,
    /// Least-squares slope of `ln mean_square` on `ln n`.
    pub slope: Option<f64>,
}

/// Second moment of the second-order degenerate U-statistic across sample
/// sizes. Sizes are simulated with independent seed streams derived from
/// `master_seed` and the size index.
pub fn degenerate_decay_experiment(
    process: &SimulationModel,
    kind: MeasureKind,
    sizes: &[usize],
    reps: usize,
    k: usize,
    master_seed: u64,
) -> Result<DecayTable> {
    if let Some(&n) = sizes.iter().find(|&&n| n > MAX_DECAY_LEN) {
        return Err(Error::SizeGuard(format!("decay experiment size {n} exceeds {MAX_DECAY_LEN}")));
    }
    if reps < 2 {
        return Err(Error::InvalidParameter("at least 2 replicates are required".into()));
    }
    let model = HoeffdingModel::for_process(process, kind, k)?;
    let mut rows = Vec::with_capacity(sizes.len());
    for (idx, &n) in sizes.iter().enumerate() {
        let seed = crate::simlab::replicate_seed(master_seed, u64::MAX - idx as u64);
        let squares = run_replicates(reps, seed, |_, s| {
            let series = simulate(process, n, s)?;
            let projector = Projector::new(&model, lag_pairs(series.values(), k)?);
            let u2 = projector.second_order();
            Ok(u2 * u2)
        })?;
        let m = Moments::of(&squares);
        rows.push(DecayRow { n, mean_square: m.mean, mc_se: (m.variance / reps as f64).sqrt() });
    }
    let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
    let ms: Vec<f64> = rows.iter().map(|r| r.mean_square).collect();
    Ok(DecayTable {
        process: *process,
        kind,
        k,
        reps,
        master_seed,
        slope: log_log_slope(&ns, &ms),
        rows,
    })
}
