//! Lag-window generators `w(·)` supported on `[−1, 1]`.
//!
//! Every builtin window has `w(0) = 1`, is even, bounded by one, and has a
//! characteristic exponent `d` with `C_w(d) = lim_{u→0} (1 − w(u)) / |u|^d`
//! finite and nonzero. `d` fixes the bias order `r_n^{−d}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowKind {
    Bartlett,
    Parzen,
    TukeyHanning,
}

/// A lag-window generator together with its bias and variance constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct LagWindow {
    pub kind: WindowKind,
}

impl LagWindow {
    pub const BARTLETT: LagWindow = LagWindow { kind: WindowKind::Bartlett };
    pub const PARZEN: LagWindow = LagWindow { kind: WindowKind::Parzen };
    pub const TUKEY_HANNING: LagWindow = LagWindow { kind: WindowKind::TukeyHanning };

    pub fn name(&self) -> &'static str {
        match self.kind {
            WindowKind::Bartlett => "bartlett",
            WindowKind::Parzen => "parzen",
            WindowKind::TukeyHanning => "tukey-hanning",
        }
    }

    /// `w(u)`, zero outside `[−1, 1]`.
    pub fn eval(&self, u: f64) -> f64 {
        let a = u.abs();
        if a > 1.0 {
            return 0.0;
        }
        match self.kind {
            WindowKind::Bartlett => 1.0 - a,
            WindowKind::Parzen if a <= 0.5 => 1.0 - 6.0 * a * a + 6.0 * a * a * a,
            WindowKind::Parzen => 2.0 * (1.0 - a).powi(3),
            WindowKind::TukeyHanning => 0.5 * (1.0 + (PI * a).cos()),
        }
    }

    /// `1 − w(u)` evaluated without cancellation near `u = 0`.
    pub fn deficit(&self, u: f64) -> f64 {
        let a = u.abs();
        match self.kind {
            _ if a > 1.0 => 1.0,
            WindowKind::Bartlett => a,
            WindowKind::Parzen if a <= 0.5 => 6.0 * a * a * (1.0 - a),
            WindowKind::Parzen => 1.0 - self.eval(a),
            WindowKind::TukeyHanning => (0.5 * PI * a).sin().powi(2),
        }
    }

    /// Characteristic exponent `d`.
    pub fn exponent(&self) -> u32 {
        match self.kind {
            WindowKind::Bartlett => 1,
            WindowKind::Parzen | WindowKind::TukeyHanning => 2,
        }
    }

    /// `C_w(d)`.
    pub fn c_w(&self) -> f64 {
        match self.kind {
            WindowKind::Bartlett => 1.0,
            WindowKind::Parzen => 6.0,
            WindowKind::TukeyHanning => PI * PI / 4.0,
        }
    }

    /// `∫_{−1}^{1} w(u)² du`.
    pub fn w2_integral(&self) -> f64 {
        match self.kind {
            WindowKind::Bartlett => 2.0 / 3.0,
            WindowKind::Parzen => 151.0 / 280.0,
            WindowKind::TukeyHanning => 0.75,
        }
    }

    /// `∫_{−1}^{1} [w(u)(1 + C_w |u|^d)]² du`: the variance constant of the
    /// estimate after subtracting the plug-in bias computed with the same
    /// window and bandwidth.
    pub fn corrected_w2_integral(&self) -> f64 {
        let d = self.exponent() as i32;
        let c = self.c_w();
        let g = |u: f64| {
            let v = self.eval(u) * (1.0 + c * u.abs().powi(d));
            v * v
        };
        2.0 * crate::quadrature::integrate_pieces(g, 0.0, 1.0, &[0.5], 1e-13)
    }
}

impl fmt::Display for LagWindow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LagWindow {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        builtin_window(s)
    }
}

/// Looks up `bartlett`, `parzen` or `tukey-hanning`.
pub fn builtin_window(name: &str) -> Result<LagWindow> {
    match name.to_ascii_lowercase().as_str() {
        "bartlett" => Ok(LagWindow::BARTLETT),
        "parzen" => Ok(LagWindow::PARZEN),
        "tukey-hanning" | "tukey" | "hanning" => Ok(LagWindow::TUKEY_HANNING),
        _ => Err(Error::UnknownWindow(name.to_string())),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthOrigin {
    User,
    Plugin,
}

/// Scale parameter `r_n` of the lag window, `w_n(k) = w(k / r_n)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bandwidth {
    pub r_n: f64,
    pub origin: BandwidthOrigin,
}

impl Bandwidth {
    pub fn user(r_n: f64) -> Result<Self> {
        Self::new(r_n, BandwidthOrigin::User)
    }

    pub fn new(r_n: f64, origin: BandwidthOrigin) -> Result<Self> {
        if !(r_n.is_finite() && r_n > 0.0) {
            return Err(Error::InvalidParameter(format!("bandwidth must be positive, got {r_n}")));
        }
        Ok(Self { r_n, origin })
    }

    /// Largest lag with a possibly nonzero weight, `⌊r_n⌋`.
    pub fn max_lag(&self) -> usize {
        self.r_n.floor() as usize
    }

    /// Checks that a series of length `n` supports every lag the window uses.
    pub fn check_for(&self, n: usize) -> Result<()> {
        let max = n.saturating_sub(4);
        if self.max_lag() > max {
            return Err(Error::BandwidthTooLarge { r_n: self.r_n, needed: self.max_lag(), max });
        }
        Ok(())
    }
}

/// `w(k / r_n)` for `k = 0, …, max_lag`.
pub fn weights(window: &LagWindow, bandwidth: &Bandwidth, max_lag: usize) -> Vec<f64> {
    (0..=max_lag).map(|k| window.eval(k as f64 / bandwidth.r_n)).collect()
}
