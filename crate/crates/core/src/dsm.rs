//! Direct sampling indicator, the Bessel-series structure function and
//! peak extraction.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::em::{incident_field, FieldMode};
use crate::error::{DsmError, Result};
use crate::forward::{SParamSet, Scenario};
use crate::geometry::Point2;
use crate::grid::DiskGrid;
use crate::special_fn::{bessel_j_orders, i_pow, TRUNCATION_MARGIN};

/// Grid points with `k · dist(r, nearest antenna)` below this are flagged as
/// violating the far-from-antenna hypothesis (`0.25` with a safety factor 10).
pub const NEAR_ANTENNA_KD: f64 = 2.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    /// Normalized Γ-correlation of data and test fields.
    Dsm,
    /// `|Φ| / max_Ω |Φ|` from the Bessel series.
    Analytic,
}

/// Real indicator values on a disk grid.
#[derive(Debug, Clone, Serialize)]
pub struct IndicatorMap {
    pub kind: MapKind,
    pub grid: DiskGrid,
    pub values: Vec<f64>,
    /// First index attaining the maximum value.
    pub argmax: usize,
    /// Set when the structure function was evaluated with `Re(k)` of a lossy medium.
    pub lossy_approximation: bool,
    /// Jacobi-Anger truncation order (analytic maps only).
    pub truncation: Option<usize>,
    /// Grid maximum of `|Φ|` before normalization (analytic maps only).
    pub phi_max: Option<f64>,
    /// Number of grid points too close to an antenna for the far-field hypothesis.
    pub near_antenna_points: usize,
}

impl IndicatorMap {
    fn new(kind: MapKind, grid: DiskGrid, values: Vec<f64>) -> Self {
        let argmax = first_argmax(&values);
        IndicatorMap {
            kind,
            grid,
            values,
            argmax,
            lossy_approximation: false,
            truncation: None,
            phi_max: None,
            near_antenna_points: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_point(&self) -> Point2 {
        self.grid.points[self.argmax]
    }

    pub fn max_value(&self) -> f64 {
        self.values[self.argmax]
    }

    /// Largest value farther than `radius` from `center`.
    pub fn max_outside(&self, center: Point2, radius: f64) -> f64 {
        self.grid
            .points
            .iter()
            .zip(&self.values)
            .filter(|(p, _)| p.distance(center) > radius)
            .map(|(_, &v)| v)
            .fold(0.0, f64::max)
    }
}

fn first_argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// `⟨f, g⟩_Γ = Σ_n f(n) · conj(g(n))`.
pub fn inner_product_gamma(f: &[Complex64], g: &[Complex64]) -> Result<Complex64> {
    if f.len() != g.len() {
        return Err(DsmError::Usage(format!("inner product of lengths {} and {}", f.len(), g.len())));
    }
    Ok(f.iter().zip(g).map(|(a, b)| a * b.conj()).sum())
}

fn gamma_norm(f: &[Complex64]) -> f64 {
    f.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// DSM indicator
/// `|⟨S, E(r,·)⟩_Γ| / (‖S‖_Γ ‖E(r,·)‖_Γ)` at every point of the search grid.
pub fn indicator_map(s: &SParamSet, scenario: &Scenario, field_mode: FieldMode) -> Result<IndicatorMap> {
    let rx = &scenario.array.rx;
    if s.len() != rx.len() {
        return Err(DsmError::Validation(format!(
            "S-parameter set has {} entries but the array has {} receivers",
            s.len(),
            rx.len()
        )));
    }
    let s_norm = gamma_norm(&s.values);
    if !(s_norm > 0.0 && s_norm.is_finite()) {
        return Err(DsmError::Degenerate("S-parameter set has zero (or non-finite) norm".into()));
    }
    let grid = scenario.grid()?;
    let k = scenario.wavenumber();

    let values = grid
        .points
        .par_iter()
        .map_init(
            || Vec::with_capacity(rx.len()),
            |fields, &r| {
                fields.clear();
                for &antenna in rx {
                    fields.push(incident_field(&k, r, antenna, field_mode)?);
                }
                let numerator = inner_product_gamma(&s.values, fields)?;
                Ok(numerator.norm() / (s_norm * gamma_norm(fields)))
            },
        )
        .collect::<Result<Vec<f64>>>()?;

    let near = count_near_antenna(&grid, scenario);
    if near > 0 {
        log::warn!("{near} grid points lie within k·d < {NEAR_ANTENNA_KD} of an antenna");
    }
    let mut map = IndicatorMap::new(MapKind::Dsm, grid, values);
    map.near_antenna_points = near;
    Ok(map)
}

fn count_near_antenna(grid: &DiskGrid, scenario: &Scenario) -> usize {
    let kr = scenario.wavenumber().real();
    grid.points
        .iter()
        .filter(|p| scenario.array.rx.iter().chain([&scenario.array.tx]).any(|a| kr * p.distance(*a) < NEAR_ANTENNA_KD))
        .count()
}

/// Smallest truncation order accepted by [`analytic_phi_map`]:
/// `⌈Re(k) · (search radius + max |r_D|)⌉ + 40`.
pub fn min_truncation(scenario: &Scenario) -> usize {
    let kr = scenario.wavenumber().real();
    let reach = scenario.anomalies.iter().map(|a| a.center.norm()).fold(0.0, f64::max);
    (kr * (scenario.search.radius_m + reach)).ceil() as usize + TRUNCATION_MARGIN
}

/// Array averages `c_m = (1/N) Σ_n e^{imθ_n}` for `m = 0..=truncation`.
fn angular_coefficients(thetas: &[f64], truncation: usize) -> Vec<Complex64> {
    let n = thetas.len() as f64;
    (0..=truncation)
        .map(|m| thetas.iter().map(|&t| Complex64::from_polar(1.0, m as f64 * t)).sum::<Complex64>() / n)
        .collect()
}

/// `Φ` at offset `x = k|r − r_D|`, direction `φ_D`, given array averages.
fn phi_from_coefficients(x: f64, phi_d: f64, coeffs: &[Complex64]) -> Result<Complex64> {
    let truncation = coeffs.len() - 1;
    let j = bessel_j_orders(truncation, x)?;
    let mut acc = Complex64::new(j[0], 0.0);
    for m in 1..=truncation {
        let rot = Complex64::from_polar(1.0, m as f64 * phi_d);
        // +m: i^m J_m e^{-imφ} c_m ; −m: i^{-m} J_{-m} e^{imφ} conj(c_m) = i^m J_m e^{imφ} conj(c_m)
        acc += i_pow(m as i64) * j[m] * (rot.conj() * coeffs[m] + rot * coeffs[m].conj());
    }
    Ok(acc)
}

/// Structure function of a single anomaly,
/// `Φ(r) = J_0(k|r−r_D|) + (1/N) Σ_n Σ_{0<|m|≤M} i^m J_m(k|r−r_D|) e^{im(θ_n−φ_D)}`,
/// with real wavenumber `k` and receiver angles `θ_n`.
pub fn structure_function(k: f64, thetas: &[f64], r: Point2, center: Point2, truncation: usize) -> Result<Complex64> {
    if thetas.is_empty() {
        return Err(DsmError::Usage("structure function needs at least one receiver angle".into()));
    }
    let offset = r - center;
    phi_from_coefficients(k * offset.norm(), offset.angle(), &angular_coefficients(thetas, truncation))
}

/// `|Φ| / max_Ω |Φ|` over the search grid.
///
/// A single anomaly uses the unweighted structure function; several
/// anomalies are combined with weights `ρ_l³ χ_l`. Lossy media are
/// evaluated with `Re(k)` and flagged.
pub fn analytic_phi_map(scenario: &Scenario, truncation: usize) -> Result<IndicatorMap> {
    if scenario.anomalies.is_empty() {
        return Err(DsmError::Validation("analytic map needs at least one anomaly".into()));
    }
    let bound = min_truncation(scenario);
    if truncation < bound {
        return Err(DsmError::Config(format!(
            "truncation order {truncation} is below the safe bound {bound} for this scenario"
        )));
    }
    let k = scenario.wavenumber();
    let kr = k.real();
    let weights: Vec<Complex64> = if scenario.anomalies.len() == 1 {
        vec![Complex64::new(1.0, 0.0)]
    } else {
        scenario
            .contrasts()?
            .into_iter()
            .zip(&scenario.anomalies)
            .map(|(chi, a)| chi * a.radius.powi(3))
            .collect()
    };
    let coeffs = angular_coefficients(&scenario.array.angles(), truncation);
    let grid = scenario.grid()?;

    let magnitudes = grid
        .points
        .par_iter()
        .map(|&r| {
            let mut phi = Complex64::new(0.0, 0.0);
            for (a, w) in scenario.anomalies.iter().zip(&weights) {
                let offset = r - a.center;
                phi += w * phi_from_coefficients(kr * offset.norm(), offset.angle(), &coeffs)?;
            }
            Ok(phi.norm())
        })
        .collect::<Result<Vec<f64>>>()?;

    let phi_max = magnitudes.iter().copied().fold(0.0, f64::max);
    if phi_max.is_nan() || phi_max <= 0.0 {
        return Err(DsmError::Degenerate("structure function vanishes on the whole grid".into()));
    }
    let values = magnitudes.iter().map(|m| m / phi_max).collect();
    let near = count_near_antenna(&grid, scenario);
    let mut map = IndicatorMap::new(MapKind::Analytic, grid, values);
    map.lossy_approximation = !k.is_real();
    map.truncation = Some(truncation);
    map.phi_max = Some(phi_max);
    map.near_antenna_points = near;
    Ok(map)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Peak {
    pub index: usize,
    pub point: Point2,
    pub value: f64,
}

/// Local maxima with value `≥ threshold`, sorted by value descending then
/// grid index.
///
/// Neighbourhoods are the 8-connected lattice cells. An equal-valued
/// connected plateau counts as one maximum, reported at its first index,
/// provided no cell bordering it is strictly higher.
pub fn peak_extract(map: &IndicatorMap, threshold: f64) -> Vec<Peak> {
    let grid = &map.grid;
    let n = map.len();
    if n == 0 {
        return Vec::new();
    }
    let width = grid.raster_width();
    let table = grid.raster_index();
    let neighbours = |idx: usize| {
        let (row, col) = grid.raster_cell(idx);
        let table = &table;
        (-1i64..=1)
            .flat_map(move |dr| (-1i64..=1).map(move |dc| (dr, dc)))
            .filter(|&d| d != (0, 0))
            .filter_map(move |(dr, dc)| {
                let (r, c) = (row as i64 + dr, col as i64 + dc);
                if r < 0 || c < 0 || r >= width as i64 || c >= width as i64 {
                    None
                } else {
                    table[r as usize * width + c as usize]
                }
            })
    };

    let mut visited = vec![false; n];
    let mut peaks = Vec::new();
    let mut stack = Vec::new();
    for start in 0..n {
        if visited[start] {
            continue;
        }
        let value = map.values[start];
        let mut is_max = true;
        visited[start] = true;
        stack.push(start);
        while let Some(idx) = stack.pop() {
            for nb in neighbours(idx) {
                let v = map.values[nb];
                if v > value {
                    is_max = false;
                } else if v == value && !visited[nb] {
                    visited[nb] = true;
                    stack.push(nb);
                }
            }
        }
        if is_max && value >= threshold {
            peaks.push(Peak { index: start, point: grid.points[start], value });
        }
    }
    peaks.sort_by(|a, b| b.value.total_cmp(&a.value).then(a.index.cmp(&b.index)));
    peaks
}
