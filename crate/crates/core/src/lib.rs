//! Lag-window spectral density estimation for rank-based measures of serial
//! dependence.
//!
//! The spectral density of a stationary series is usually the Fourier
//! transform of its autocovariances. This crate replaces the autocovariance
//! at lag `k` with a U-statistic estimate of a dependence measure (Kendall's
//! τ, Spearman's ρ, or the autocovariance itself) and smooths the resulting
//! sequence with a lag window:
//!
//! ```text
//! f̂(ω) = (1/2π) Σ_{|k| ≤ r} w(k/r) ξ̂_k e^{-ikω}
//! ```
//!
//! Modules:
//!
//! - [`dependence`]: per-lag U-statistics, fast paths and enumeration oracles.
//! - [`windows`]: lag-window generators and their bias/variance constants.
//! - [`spectral`]: the lag-window estimate, bias and variance plug-ins,
//!   confidence intervals and the MSE-optimal bandwidth.
//! - [`hoeffding`]: Hoeffding decomposition of the lag U-statistics under
//!   analytic pair laws.
//! - [`simlab`]: process simulation and Monte Carlo experiments.

pub mod dependence;
pub mod error;
pub mod hoeffding;
pub mod quadrature;
pub mod series;
pub mod simlab;
pub mod spectral;
pub mod windows;

pub use dependence::{dependence_sequence, DependenceSequence, MeasureKind};
pub use error::{Error, Result};
pub use series::TimeSeries;
pub use spectral::{FrequencyGrid, SpectralEstimate};
pub use windows::{Bandwidth, BandwidthOrigin, LagWindow, WindowKind};
