//! Media, wavenumber, contrast, antenna geometry and incident fields.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{DsmError, Result};
use crate::geometry::Point2;
use crate::special_fn::hankel_h0_second;

/// Vacuum permittivity in F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Vacuum permeability `4π × 10⁻⁷` H/m.
pub const MU0: f64 = 4.0e-7 * PI;

/// Relative tolerance on `|rx[n]| = R`.
const RADIUS_TOL: f64 = 1e-12;

fn default_mu() -> f64 {
    MU0
}

/// Homogeneous background medium at a single frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumParams {
    /// Relative permittivity `ε_B`.
    #[serde(rename = "eps_rel")]
    pub eps_rel_background: f64,
    /// Conductivity `σ_B` in S/m.
    #[serde(rename = "sigma")]
    pub sigma_background: f64,
    /// Permeability in H/m.
    #[serde(default = "default_mu")]
    pub mu: f64,
    /// Frequency in Hz.
    #[serde(rename = "frequency_hz")]
    pub frequency: f64,
}

impl MediumParams {
    pub fn new(eps_rel_background: f64, sigma_background: f64, frequency: f64) -> Result<Self> {
        let medium = MediumParams { eps_rel_background, sigma_background, mu: MU0, frequency };
        medium.validate()?;
        Ok(medium)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(DsmError::Validation(format!("medium: {what}")));
        if !(self.eps_rel_background >= 1.0 && self.eps_rel_background.is_finite()) {
            return bad("eps_rel must be >= 1");
        }
        if !(self.sigma_background >= 0.0 && self.sigma_background.is_finite()) {
            return bad("sigma must be >= 0");
        }
        if !(self.frequency > 0.0 && self.frequency.is_finite()) {
            return bad("frequency_hz must be > 0");
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad("mu must be > 0");
        }
        Ok(())
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    pub fn is_lossless(&self) -> bool {
        self.sigma_background == 0.0
    }
}

/// Complex background wavenumber and the wavelength `2π / Re(k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Wavenumber {
    pub k: Complex64,
    pub wavelength: f64,
}

impl Wavenumber {
    pub fn real(&self) -> f64 {
        self.k.re
    }

    pub fn is_real(&self) -> bool {
        self.k.im == 0.0
    }
}

/// `k = sqrt(ω² μ (ε₀ ε_B + i σ_B / ω))`, principal branch.
pub fn wavenumber(medium: &MediumParams) -> Wavenumber {
    let omega = medium.omega();
    let k_sq = omega * omega * medium.mu * Complex64::new(EPS0 * medium.eps_rel_background, medium.sigma_background / omega);
    let k = k_sq.sqrt();
    Wavenumber { k, wavelength: 2.0 * PI / k.re }
}

/// Normalization of the conductivity term in the contrast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContrastMode {
    /// `(ε − ε_B)/ε_B + i (σ − σ_B)/(ω σ_B)`.
    #[default]
    Conductivity,
    /// `(ε − ε_B)/ε_B + i (σ − σ_B)/(ω ε₀ ε_B)`.
    Conventional,
}

/// Incident-field model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FieldMode {
    /// `H0^(2)(Re(k) |a − b|)`; lossless media only.
    Exact,
    /// Far-field form of `H0^(2)` around the point farther from the origin.
    Asymptotic,
}

impl FieldMode {
    /// `Exact` for lossless media, `Asymptotic` otherwise.
    pub fn default_for(medium: &MediumParams) -> Self {
        if medium.is_lossless() {
            FieldMode::Exact
        } else {
            FieldMode::Asymptotic
        }
    }
}

/// Small disk-shaped anomaly `D = r_D + ρB`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Anomaly {
    pub center: Point2,
    #[serde(rename = "radius_m")]
    pub radius: f64,
    pub eps_rel: f64,
    pub sigma: f64,
}

impl Anomaly {
    pub fn new(center: Point2, radius: f64, eps_rel: f64, sigma: f64) -> Result<Self> {
        let anomaly = Anomaly { center, radius, eps_rel, sigma };
        anomaly.validate()?;
        Ok(anomaly)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(DsmError::Validation("anomaly: center must be finite".into()));
        }
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(DsmError::Validation(format!("anomaly: radius_m must be > 0, got {}", self.radius)));
        }
        if !(self.eps_rel.is_finite() && self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(DsmError::Validation("anomaly: eps_rel and sigma must be finite, sigma >= 0".into()));
        }
        Ok(())
    }
}

/// Complex contrast `χ` of an anomaly against the background.
pub fn contrast(anomaly: &Anomaly, medium: &MediumParams, mode: ContrastMode) -> Result<Complex64> {
    let re = (anomaly.eps_rel - medium.eps_rel_background) / medium.eps_rel_background;
    let dsigma = anomaly.sigma - medium.sigma_background;
    let denom = match mode {
        ContrastMode::Conductivity => {
            if medium.sigma_background == 0.0 {
                return Err(DsmError::Domain(
                    "contrast mode `conductivity` divides by the background conductivity, which is zero".into(),
                ));
            }
            medium.omega() * medium.sigma_background
        }
        ContrastMode::Conventional => medium.omega() * EPS0 * medium.eps_rel_background,
    };
    Ok(Complex64::new(re, dsigma / denom))
}

/// One transmitter and `N` receivers on a circle of radius `R`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AntennaArray {
    pub tx: Point2,
    pub rx: Vec<Point2>,
    pub radius: f64,
}

impl AntennaArray {
    /// Receivers at `θ_n = tx_angle − 2π(n−1)/N`, transmitter at `tx_angle`.
    pub fn circular(n: usize, radius: f64, tx_angle: f64) -> Result<Self> {
        if n < 2 {
            return Err(DsmError::Validation(format!("array: at least 2 receivers required, got n = {n}")));
        }
        if !(radius > 0.0 && radius.is_finite() && tx_angle.is_finite()) {
            return Err(DsmError::Validation("array: radius_m must be > 0 and tx_angle_rad finite".into()));
        }
        let rx = (0..n)
            .map(|i| Point2::from_polar(radius, tx_angle - 2.0 * PI * i as f64 / n as f64))
            .collect();
        Ok(AntennaArray { tx: Point2::from_polar(radius, tx_angle), rx, radius })
    }

    /// Explicit positions; all receivers must share one radius.
    pub fn explicit(tx: Point2, rx: Vec<Point2>) -> Result<Self> {
        if rx.len() < 2 {
            return Err(DsmError::Validation(format!("array: at least 2 receivers required, got {}", rx.len())));
        }
        if !tx.is_finite() || rx.iter().any(|p| !p.is_finite()) {
            return Err(DsmError::Validation("array: positions must be finite".into()));
        }
        let radius = rx[0].norm();
        if radius == 0.0 {
            return Err(DsmError::Validation("array: receivers must not sit at the origin".into()));
        }
        for (i, p) in rx.iter().enumerate() {
            if (p.norm() - radius).abs() > RADIUS_TOL * radius {
                return Err(DsmError::Validation(format!(
                    "array: receiver {} has radius {} but receiver 1 has {radius}",
                    i + 1,
                    p.norm()
                )));
            }
        }
        Ok(AntennaArray { tx, rx, radius })
    }

    pub fn len(&self) -> usize {
        self.rx.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rx.is_empty()
    }

    /// Receiver polar angles `θ_n`.
    pub fn angles(&self) -> Vec<f64> {
        self.rx.iter().map(|p| p.angle()).collect()
    }

    /// Rotate every antenna about the origin.
    pub fn rotated(&self, angle: f64) -> Self {
        AntennaArray {
            tx: self.tx.rotated(angle),
            rx: self.rx.iter().map(|p| p.rotated(angle)).collect(),
            radius: self.radius,
        }
    }
}

/// Scalar 2D incident field between `src` and `obs`.
///
/// `Asymptotic` evaluates
/// `((1+i)/(4√(kπ))) · e^{ik|a|}/√|a| · e^{−ik θ_a·b}` with `a` the point
/// farther from the origin (the antenna) and `b` the other one, using the
/// complex `k`. Both modes are symmetric in their two points.
pub fn incident_field(k: &Wavenumber, src: Point2, obs: Point2, mode: FieldMode) -> Result<Complex64> {
    let dist = src.distance(obs);
    if dist.is_nan() || dist <= 0.0 {
        return Err(DsmError::Domain(format!(
            "incident field is singular at coincident points ({}, {})",
            src.x, src.y
        )));
    }
    match mode {
        FieldMode::Exact => {
            if !k.is_real() {
                return Err(DsmError::Unsupported(
                    "exact fields need a real wavenumber; use asymptotic fields for lossy media".into(),
                ));
            }
            hankel_h0_second(k.k.re * dist)
        }
        FieldMode::Asymptotic => {
            let (far, near) = if src.norm() >= obs.norm() { (src, obs) } else { (obs, src) };
            Ok(asymptotic_field(k.k, far, near))
        }
    }
}

pub(crate) fn asymptotic_field(k: Complex64, far: Point2, near: Point2) -> Complex64 {
    let r = far.norm();
    let direction = far * (1.0 / r);
    let i = Complex64::i();
    let prefactor = Complex64::new(1.0, 1.0) / (4.0 * (k * PI).sqrt());
    prefactor * (i * k * r).exp() / r.sqrt() * (-i * k * direction.dot(near)).exp()
}
