//! Born-approximated scattered-field S-parameters.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::em::{contrast, incident_field, wavenumber, Anomaly, AntennaArray, ContrastMode, FieldMode, MediumParams, Wavenumber};
use crate::error::{DsmError, Result};
use crate::geometry::Point2;
use crate::grid::{build_disk_grid, DiskGrid};

/// Coarsest quadrature accepted by [`synth_extended`].
pub const MIN_CELLS_PER_WAVELENGTH: u32 = 10;

/// Scattered-field S-parameters, one per receiver, in array order.
#[derive(Debug, Clone, PartialEq)]
pub struct SParamSet {
    pub values: Vec<Complex64>,
}

impl SParamSet {
    pub fn new(values: Vec<Complex64>) -> Self {
        SParamSet { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Mean power `Σ|S(n)|² / N`.
    pub fn mean_power(&self) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() / self.values.len() as f64
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        SParamSet::new(self.values.iter().map(|v| v * factor).collect())
    }
}

/// Disk-shaped search domain `Ω` centred at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchDomain {
    pub radius_m: f64,
    pub step_m: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseOptions {
    pub snr_db: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOptions {
    #[serde(default)]
    pub contrast_mode: ContrastMode,
    /// Defaults to [`FieldMode::default_for`] the medium when absent.
    #[serde(default)]
    pub field_mode: Option<FieldMode>,
    #[serde(default)]
    pub noise: Option<NoiseOptions>,
}

/// Everything needed to synthesize data and image it.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub medium: MediumParams,
    pub array: AntennaArray,
    pub anomalies: Vec<Anomaly>,
    pub search: SearchDomain,
    pub options: ScenarioOptions,
}

impl Scenario {
    pub fn new(
        medium: MediumParams,
        array: AntennaArray,
        anomalies: Vec<Anomaly>,
        search: SearchDomain,
        options: ScenarioOptions,
    ) -> Result<Self> {
        let scenario = Scenario { medium, array, anomalies, search, options };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn validate(&self) -> Result<()> {
        self.medium.validate()?;
        for a in &self.anomalies {
            a.validate()?;
        }
        if self.array.len() < 2 {
            return Err(DsmError::Validation("array: at least 2 receivers required".into()));
        }
        let s = self.search;
        if !(s.radius_m > 0.0 && s.step_m > 0.0 && s.radius_m.is_finite() && s.step_m.is_finite()) {
            return Err(DsmError::Validation("search: radius_m and step_m must be positive".into()));
        }
        if s.radius_m >= self.array.radius {
            return Err(DsmError::Validation(format!(
                "search: radius_m ({}) must be smaller than the array radius ({})",
                s.radius_m, self.array.radius
            )));
        }
        if let Some(noise) = self.options.noise {
            if noise.snr_db.is_nan() {
                return Err(DsmError::Validation("options.noise: snr_db must be a number".into()));
            }
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> Wavenumber {
        wavenumber(&self.medium)
    }

    /// Configured field mode, or the medium's default.
    pub fn field_mode(&self) -> FieldMode {
        self.options.field_mode.unwrap_or_else(|| FieldMode::default_for(&self.medium))
    }

    pub fn contrasts(&self) -> Result<Vec<Complex64>> {
        self.anomalies.iter().map(|a| contrast(a, &self.medium, self.options.contrast_mode)).collect()
    }

    pub fn grid(&self) -> Result<DiskGrid> {
        build_disk_grid(self.search.radius_m, self.search.step_m)
    }

    /// Same scenario with the array replaced by `n` antennas on the same
    /// circle, transmitter angle preserved.
    pub fn with_antenna_count(&self, n: usize) -> Result<Self> {
        let array = AntennaArray::circular(n, self.array.radius, self.array.tx.angle())?;
        Scenario::new(self.medium, array, self.anomalies.clone(), self.search, self.options)
    }

    /// Anomalies too large for the small-target Born model (`ρ ≥ λ/2`).
    pub fn born_warnings(&self) -> Vec<String> {
        let lambda = self.wavenumber().wavelength;
        self.anomalies
            .iter()
            .enumerate()
            .filter(|(_, a)| a.radius >= 0.5 * lambda)
            .map(|(i, a)| {
                format!(
                    "anomaly {} has radius {} m >= half a wavelength ({} m); the point Born model is unreliable",
                    i + 1,
                    a.radius,
                    0.5 * lambda
                )
            })
            .collect()
    }
}

/// `i k² / (4 ω μ)`.
fn born_prefactor(k: &Wavenumber, medium: &MediumParams) -> Complex64 {
    Complex64::i() * k.k * k.k / (4.0 * medium.omega() * medium.mu)
}

fn require_anomalies(scenario: &Scenario) -> Result<()> {
    if scenario.anomalies.is_empty() {
        return Err(DsmError::Validation("synthesis needs at least one anomaly".into()));
    }
    Ok(())
}

/// Point-anomaly Born data:
/// `S(n) = Σ_l ρ_l³ (ik²/4ωμ) χ_l E(r_TX, r_l) E(r_l, r_RX^(n))`.
pub fn synth_point(scenario: &Scenario, field_mode: FieldMode) -> Result<SParamSet> {
    require_anomalies(scenario)?;
    for w in scenario.born_warnings() {
        log::warn!("{w}");
    }
    let k = scenario.wavenumber();
    let prefactor = born_prefactor(&k, &scenario.medium);
    let chis = scenario.contrasts()?;

    let sources = scenario
        .anomalies
        .iter()
        .zip(&chis)
        .map(|(a, chi)| {
            let tx_field = incident_field(&k, scenario.array.tx, a.center, field_mode)?;
            Ok((a.center, prefactor * a.radius.powi(3) * chi * tx_field))
        })
        .collect::<Result<Vec<_>>>()?;

    let values = scenario
        .array
        .rx
        .par_iter()
        .map(|&rx| {
            sources.iter().try_fold(Complex64::new(0.0, 0.0), |acc, &(center, weight)| {
                Ok(acc + weight * incident_field(&k, center, rx, field_mode)?)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SParamSet::new(values))
}

/// A quadrature cell: its area inside the disk and the centroid of that part.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DiskCell {
    pub weight: f64,
    pub centroid: Point2,
}

/// Area and first moments of `[x0,x1]×[y0,y1] ∩ {|p| ≤ r}`.
fn clipped_cell_moments(x0: f64, x1: f64, y0: f64, y1: f64, r: f64) -> (f64, f64, f64) {
    #[derive(Clone, Copy)]
    enum Edge {
        Const(f64),
        Arc,
        NegArc,
    }
    let r2 = r * r;
    let s = |x: f64| (r2 - x * x).max(0.0).sqrt();
    // ∫ s dx
    let area_prim = |x: f64| 0.5 * (x * s(x) + r2 * (x / r).clamp(-1.0, 1.0).asin());
    // ∫ x s dx
    let xmom_prim = |x: f64| -(r2 - x * x).max(0.0).powf(1.5) / 3.0;
    // ∫ s² dx
    let sq_prim = |x: f64| r2 * x - x * x * x / 3.0;

    let xa = x0.max(-r);
    let xb = x1.min(r);
    if xa >= xb {
        return (0.0, 0.0, 0.0);
    }
    let mut breaks = vec![xa, xb];
    for y in [y0, y1] {
        if y.abs() < r {
            let xs = (r2 - y * y).sqrt();
            for b in [-xs, xs] {
                if b > xa && b < xb {
                    breaks.push(b);
                }
            }
        }
    }
    breaks.sort_by(|a, b| a.total_cmp(b));

    let (mut area, mut mx, mut my) = (0.0, 0.0, 0.0);
    for w in breaks.windows(2) {
        let (u, v) = (w[0], w[1]);
        if v <= u {
            continue;
        }
        let mid = 0.5 * (u + v);
        let sm = s(mid);
        let upper = if y1 < sm { Edge::Const(y1) } else { Edge::Arc };
        let lower = if y0 > -sm { Edge::Const(y0) } else { Edge::NegArc };
        let at = |e: Edge| match e {
            Edge::Const(c) => c,
            Edge::Arc => sm,
            Edge::NegArc => -sm,
        };
        if at(upper) <= at(lower) {
            continue;
        }
        let i0 = |e: Edge| match e {
            Edge::Const(c) => c * (v - u),
            Edge::Arc => area_prim(v) - area_prim(u),
            Edge::NegArc => -(area_prim(v) - area_prim(u)),
        };
        let i1 = |e: Edge| match e {
            Edge::Const(c) => 0.5 * c * (v * v - u * u),
            Edge::Arc => xmom_prim(v) - xmom_prim(u),
            Edge::NegArc => -(xmom_prim(v) - xmom_prim(u)),
        };
        let i2 = |e: Edge| match e {
            Edge::Const(c) => c * c * (v - u),
            Edge::Arc | Edge::NegArc => sq_prim(v) - sq_prim(u),
        };
        area += i0(upper) - i0(lower);
        mx += i1(upper) - i1(lower);
        my += 0.5 * (i2(upper) - i2(lower));
    }
    (area, mx, my)
}

/// Uniform Cartesian mesh of pitch `h` clipped to the disk `|p − c| ≤ ρ`.
/// Each partial cell carries its exact clipped area and is sampled at the
/// centroid of the clipped part.
pub(crate) fn disk_cells(center: Point2, radius: f64, h: f64) -> Vec<DiskCell> {
    let n = (radius / h).ceil() as i64;
    let mut cells = Vec::with_capacity((4 * n * n) as usize);
    for j in -n..n {
        for i in -n..n {
            let (x0, y0) = (i as f64 * h, j as f64 * h);
            let (area, mx, my) = clipped_cell_moments(x0, x0 + h, y0, y0 + h, radius);
            if area > 0.0 {
                cells.push(DiskCell { weight: area, centroid: center + Point2::new(mx / area, my / area) });
            }
        }
    }
    cells
}

/// Born data for finite disks by midpoint quadrature of the scattering
/// integral with the total field replaced by the incident one.
///
/// The integrand is averaged over each disk and scaled by `ρ³`, the same
/// volume factor the point model uses, so both models coincide as `ρ → 0`.
pub fn synth_extended(scenario: &Scenario, cells_per_wavelength: u32) -> Result<SParamSet> {
    require_anomalies(scenario)?;
    if cells_per_wavelength < MIN_CELLS_PER_WAVELENGTH {
        return Err(DsmError::Config(format!(
            "quadrature needs at least {MIN_CELLS_PER_WAVELENGTH} cells per wavelength, got {cells_per_wavelength}"
        )));
    }
    let field_mode = scenario.field_mode();
    let k = scenario.wavenumber();
    let prefactor = born_prefactor(&k, &scenario.medium);
    let chis = scenario.contrasts()?;
    let h = k.wavelength / cells_per_wavelength as f64;

    // (point, weight · E(r_TX, point)) over every cell of every disk
    let mut samples = Vec::new();
    for (a, chi) in scenario.anomalies.iter().zip(&chis) {
        let scale = prefactor * chi * (a.radius / PI);
        for cell in disk_cells(a.center, a.radius, h) {
            let tx_field = incident_field(&k, scenario.array.tx, cell.centroid, field_mode)?;
            samples.push((cell.centroid, scale * cell.weight * tx_field));
        }
    }

    let values = scenario
        .array
        .rx
        .par_iter()
        .map(|&rx| {
            samples.iter().try_fold(Complex64::new(0.0, 0.0), |acc, &(p, w)| {
                Ok(acc + w * incident_field(&k, p, rx, field_mode)?)
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SParamSet::new(values))
}

/// Adds circularly-symmetric complex Gaussian noise at the given per-set
/// signal-to-noise ratio. `snr_db = +∞` returns the input unchanged.
pub fn add_noise(s: &SParamSet, snr_db: f64, seed: u64) -> Result<SParamSet> {
    if snr_db == f64::INFINITY {
        return Ok(s.clone());
    }
    if !snr_db.is_finite() {
        return Err(DsmError::Validation(format!("snr_db must be finite or +inf, got {snr_db}")));
    }
    let noise_power = s.mean_power() * 10f64.powf(-snr_db / 10.0);
    let normal = Normal::new(0.0, (0.5 * noise_power).sqrt())
        .map_err(|e| DsmError::Validation(format!("noise distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = s
        .values
        .iter()
        .map(|v| {
            let re = normal.sample(&mut rng);
            let im = normal.sample(&mut rng);
            v + Complex64::new(re, im)
        })
        .collect();
    Ok(SParamSet::new(values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipped_full_cell_is_square() {
        let (a, mx, my) = clipped_cell_moments(-0.1, 0.1, 0.2, 0.3, 1.0);
        assert!((a - 0.02).abs() < 1e-15);
        assert!(mx.abs() < 1e-15);
        assert!((my / a - 0.25).abs() < 1e-14);
    }

    #[test]
    fn clipped_cells_tile_the_disk() {
        let r = 0.37;
        for h in [0.5, 0.1, 0.033, 0.0071] {
            let cells = disk_cells(Point2::ORIGIN, r, h);
            let area: f64 = cells.iter().map(|c| c.weight).sum();
            assert!((area - PI * r * r).abs() < 1e-12, "h={h}: {area}");
            let mx: f64 = cells.iter().map(|c| c.weight * c.centroid.x).sum();
            let my: f64 = cells.iter().map(|c| c.weight * c.centroid.y).sum();
            assert!(mx.abs() < 1e-13 && my.abs() < 1e-13);
            for c in &cells {
                assert!(c.centroid.norm() <= r + 1e-15);
            }
        }
    }

    #[test]
    fn clipped_quarter_disk_centroid() {
        let (a, mx, my) = clipped_cell_moments(0.0, 2.0, 0.0, 2.0, 1.0);
        assert!((a - PI / 4.0).abs() < 1e-14);
        let c = 4.0 / (3.0 * PI);
        assert!((mx / a - c).abs() < 1e-14);
        assert!((my / a - c).abs() < 1e-14);
    }

    #[test]
    fn noise_sentinel_and_errors() {
        let s = SParamSet::new(vec![Complex64::new(1.0, 2.0), Complex64::new(-0.5, 0.1)]);
        assert_eq!(add_noise(&s, f64::INFINITY, 3).unwrap(), s);
        assert!(add_noise(&s, f64::NAN, 3).is_err());
        assert!(add_noise(&s, f64::NEG_INFINITY, 3).is_err());
    }
}
