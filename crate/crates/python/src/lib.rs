//! Python bindings: `import dsm_py`.

use std::path::{Path, PathBuf};

use dsm_core::dsm::{min_truncation, MapKind};
use dsm_core::io::{parse_scenario, read_scenario, read_sparams, write_map, write_sparams, MapFormat};
use dsm_core::special_fn;
use dsm_core::{DsmError, FieldMode, IndicatorMap, MediumParams, SParamSet};
use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: DsmError) -> PyErr {
    match e {
        DsmError::Io { .. } => PyIOError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn field_mode(name: Option<&str>, scenario: &dsm_core::Scenario) -> PyResult<FieldMode> {
    match name {
        None => Ok(scenario.field_mode()),
        Some("exact") => Ok(FieldMode::Exact),
        Some("asymptotic") => Ok(FieldMode::Asymptotic),
        Some(other) => Err(PyValueError::new_err(format!("unknown field mode {other:?}"))),
    }
}

/// Imaging scenario: medium, antenna array, anomalies and search disk.
#[pyclass(name = "Scenario", module = "dsm_py", frozen)]
struct PyScenario {
    inner: dsm_core::Scenario,
}

#[pymethods]
impl PyScenario {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self { inner: read_scenario(path).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: parse_scenario(text, Path::new("<string>")).map_err(py_err)? })
    }

    #[getter]
    fn n_antennas(&self) -> usize {
        self.inner.array.len()
    }

    #[getter]
    fn wavenumber(&self) -> Complex64 {
        self.inner.wavenumber().k
    }

    #[getter]
    fn wavelength(&self) -> f64 {
        self.inner.wavenumber().wavelength
    }

    /// `(x, y, radius)` for each anomaly.
    #[getter]
    fn anomalies(&self) -> Vec<(f64, f64, f64)> {
        self.inner.anomalies.iter().map(|a| (a.center.x, a.center.y, a.radius)).collect()
    }

    #[getter]
    fn min_truncation(&self) -> usize {
        min_truncation(&self.inner)
    }

    fn with_antenna_count(&self, n: usize) -> PyResult<Self> {
        Ok(Self { inner: self.inner.with_antenna_count(n).map_err(py_err)? })
    }

    #[pyo3(signature = (field_mode=None))]
    fn synth_point(&self, field_mode: Option<&str>) -> PyResult<Vec<Complex64>> {
        let mode = self::field_mode(field_mode, &self.inner)?;
        Ok(dsm_core::synth_point(&self.inner, mode).map_err(py_err)?.values)
    }

    #[pyo3(signature = (cells_per_wavelength=20))]
    fn synth_extended(&self, cells_per_wavelength: u32) -> PyResult<Vec<Complex64>> {
        Ok(dsm_core::synth_extended(&self.inner, cells_per_wavelength).map_err(py_err)?.values)
    }

    #[pyo3(signature = (sparams, field_mode=None))]
    fn indicator_map(&self, sparams: Vec<Complex64>, field_mode: Option<&str>) -> PyResult<Map> {
        let mode = self::field_mode(field_mode, &self.inner)?;
        let map = dsm_core::indicator_map(&SParamSet::new(sparams), &self.inner, mode).map_err(py_err)?;
        Ok(Map { inner: map })
    }

    #[pyo3(signature = (truncation=None))]
    fn analytic_map(&self, truncation: Option<usize>) -> PyResult<Map> {
        let m = truncation.unwrap_or_else(|| min_truncation(&self.inner));
        Ok(Map { inner: dsm_core::analytic_phi_map(&self.inner, m).map_err(py_err)? })
    }

    fn __repr__(&self) -> String {
        format!(
            "Scenario(n_antennas={}, anomalies={}, grid_step={})",
            self.inner.array.len(),
            self.inner.anomalies.len(),
            self.inner.search.step_m
        )
    }
}

/// Normalized indicator values on the search grid.
#[pyclass(module = "dsm_py", frozen)]
struct Map {
    inner: IndicatorMap,
}

#[pymethods]
impl Map {
    #[getter]
    fn kind(&self) -> &'static str {
        match self.inner.kind {
            MapKind::Dsm => "dsm",
            MapKind::Analytic => "analytic",
        }
    }

    #[getter]
    fn points(&self) -> Vec<(f64, f64)> {
        self.inner.grid.points.iter().map(|p| (p.x, p.y)).collect()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.inner.values.clone()
    }

    #[getter]
    fn argmax(&self) -> (f64, f64) {
        let p = self.inner.max_point();
        (p.x, p.y)
    }

    #[getter]
    fn lossy_approximation(&self) -> bool {
        self.inner.lossy_approximation
    }

    /// Local maxima `(x, y, value)` at or above `threshold`, strongest first.
    #[pyo3(signature = (threshold=0.8))]
    fn peaks(&self, threshold: f64) -> Vec<(f64, f64, f64)> {
        dsm_core::peak_extract(&self.inner, threshold).into_iter().map(|p| (p.point.x, p.point.y, p.value)).collect()
    }

    /// Write as `csv` or `pgm`.
    #[pyo3(signature = (path, format="csv"))]
    fn write(&self, path: PathBuf, format: &str) -> PyResult<()> {
        let format = match format {
            "csv" => MapFormat::Csv,
            "pgm" => MapFormat::Pgm,
            other => return Err(PyValueError::new_err(format!("unknown map format {other:?}"))),
        };
        write_map(&self.inner, path, format).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn bessel_j(m: i32, x: f64) -> PyResult<f64> {
    special_fn::bessel_j(m, x).map_err(py_err)
}

#[pyfunction]
fn bessel_j_orders(m_max: usize, x: f64) -> PyResult<Vec<f64>> {
    special_fn::bessel_j_orders(m_max, x).map_err(py_err)
}

#[pyfunction]
fn hankel_h0_second(x: f64) -> PyResult<Complex64> {
    special_fn::hankel_h0_second(x).map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (x, theta, truncation=None))]
fn jacobi_anger(x: f64, theta: f64, truncation: Option<usize>) -> PyResult<Complex64> {
    let m = truncation.unwrap_or_else(|| special_fn::safe_truncation_order(x));
    special_fn::jacobi_anger(x, theta, m).map_err(py_err)
}

#[pyfunction]
fn wavenumber(eps_rel: f64, sigma: f64, frequency_hz: f64) -> PyResult<Complex64> {
    let medium = MediumParams::new(eps_rel, sigma, frequency_hz).map_err(py_err)?;
    Ok(dsm_core::wavenumber(&medium).k)
}

/// Grid points of the search disk in raster order.
#[pyfunction]
fn disk_grid(radius: f64, step: f64) -> PyResult<Vec<(f64, f64)>> {
    let grid = dsm_core::build_disk_grid(radius, step).map_err(py_err)?;
    Ok(grid.points.iter().map(|p| (p.x, p.y)).collect())
}

#[pyfunction]
fn add_noise(sparams: Vec<Complex64>, snr_db: f64, seed: u64) -> PyResult<Vec<Complex64>> {
    Ok(dsm_core::add_noise(&SParamSet::new(sparams), snr_db, seed).map_err(py_err)?.values)
}

#[pyfunction]
fn load_sparams(path: PathBuf) -> PyResult<Vec<Complex64>> {
    Ok(read_sparams(path).map_err(py_err)?.values)
}

#[pyfunction]
fn save_sparams(sparams: Vec<Complex64>, path: PathBuf) -> PyResult<()> {
    write_sparams(&SParamSet::new(sparams), path).map_err(py_err)
}

#[pymodule]
fn dsm_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<Map>()?;
    m.add_function(wrap_pyfunction!(bessel_j, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_j_orders, m)?)?;
    m.add_function(wrap_pyfunction!(hankel_h0_second, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_anger, m)?)?;
    m.add_function(wrap_pyfunction!(wavenumber, m)?)?;
    m.add_function(wrap_pyfunction!(disk_grid, m)?)?;
    m.add_function(wrap_pyfunction!(add_noise, m)?)?;
    m.add_function(wrap_pyfunction!(load_sparams, m)?)?;
    m.add_function(wrap_pyfunction!(save_sparams, m)?)?;
    Ok(())
}
