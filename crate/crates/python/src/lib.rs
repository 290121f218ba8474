//! Python bindings for the planar eikonal library.
//!
//! Lengths are in units of the screening radius R and momenta in 1/R unless a
//! name says keV.

use std::path::PathBuf;

use planar_eikonal::{app, chi, config, mc, specfun, target, validate, xsec, Error};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::CapExceeded { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Scattering geometry: a stack of planes, the projectile and the unit system.
#[pyclass(name = "Setup", module = "planar_eikonal_py", skip_from_py_object)]
#[derive(Clone)]
struct PySetup {
    inner: xsec::Setup,
}

#[pymethods]
impl PySetup {
    /// Si (100) planes with the mean-phase amplitude set to `amplitude`.
    #[staticmethod]
    #[pyo3(signature = (n_planes, amplitude = 10.0))]
    fn silicon_100(n_planes: usize, amplitude: f64) -> PyResult<Self> {
        let (t, units) = target::TargetSpec::silicon_100(n_planes);
        let proj = target::ProjectileSpec::electron();
        let t = t.with_amplitude(&proj, amplitude).map_err(to_py)?;
        Ok(PySetup {
            inner: xsec::Setup::new(t, proj, units),
        })
    }

    #[staticmethod]
    fn from_preset(name: &str) -> PyResult<Self> {
        let run = config::preset(name)
            .and_then(|c| c.resolve())
            .map_err(to_py)?;
        Ok(PySetup { inner: run.setup })
    }

    #[staticmethod]
    fn from_toml(text: &str) -> PyResult<Self> {
        let run = config::RunConfig::from_toml_str(text)
            .and_then(|c| c.resolve())
            .map_err(to_py)?;
        Ok(PySetup { inner: run.setup })
    }

    #[getter]
    fn n_planes(&self) -> usize {
        self.inner.target.n_planes
    }

    #[getter]
    fn spacing(&self) -> f64 {
        self.inner.target.spacing
    }

    #[getter]
    fn amplitude(&self) -> PyResult<f64> {
        Ok(self.inner.profile().map_err(to_py)?.amplitude)
    }

    #[getter]
    fn kev_per_unit(&self) -> f64 {
        self.inner.units.kev_per_unit()
    }

    fn plane_positions(&self) -> Vec<f64> {
        self.inner.target.plane_positions()
    }

    fn profile(&self) -> PyResult<PyChiProfile> {
        Ok(PyChiProfile {
            inner: self.inner.profile().map_err(to_py)?,
        })
    }

    /// Spectrum on `q` (1/R) by route name: structure_factor, direct_2d, linear or born.
    #[pyo3(signature = (q, route = "structure_factor"))]
    fn spectrum<'py>(
        &self,
        py: Python<'py>,
        q: Vec<f64>,
        route: &str,
    ) -> PyResult<Bound<'py, PyDict>> {
        let route = xsec::Route::parse(route).map_err(to_py)?;
        let r = py
            .detach(|| xsec::spectrum(&self.inner, route, &q))
            .map_err(to_py)?;
        spectrum_dict(py, &r)
    }

    fn __repr__(&self) -> String {
        format!(
            "Setup(n_planes={}, spacing={:.4}, length_z={:.4})",
            self.inner.target.n_planes, self.inner.target.spacing, self.inner.target.length_z
        )
    }
}

fn spectrum_dict<'py>(py: Python<'py>, r: &xsec::SpectrumResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("route", r.meta.route.name())?;
    d.set_item("q_internal", &r.q_internal)?;
    d.set_item("q_kev", &r.q_kev)?;
    d.set_item("total", &r.total)?;
    for (name, col) in [
        ("coherent", &r.coherent),
        ("incoherent", &r.incoherent),
        ("linear_only", &r.linear_only),
        ("born_total", &r.born_total),
        ("born_coherent", &r.born_coherent),
        ("born_incoherent", &r.born_incoherent),
    ] {
        d.set_item(name, col.as_ref())?;
    }
    d.set_item("imaginary_residue", r.meta.imaginary_residue)?;
    let peaks: Vec<(f64, f64, i64)> = r
        .meta
        .peaks
        .iter()
        .map(|p| (p.q_internal, p.value, p.lattice_index))
        .collect();
    d.set_item("peaks", peaks)?;
    Ok(d)
}

/// Plane-averaged phase functions of a stack.
#[pyclass(name = "ChiProfile", module = "planar_eikonal_py", skip_from_py_object)]
#[derive(Clone)]
struct PyChiProfile {
    inner: chi::ChiProfile,
}

#[pymethods]
impl PyChiProfile {
    #[getter]
    fn amplitude(&self) -> f64 {
        self.inner.amplitude
    }

    #[getter]
    fn coupling(&self) -> f64 {
        self.inner.coupling
    }

    fn plane_mean(&self, x: f64) -> f64 {
        self.inner.plane_mean(x)
    }

    fn plane_corr(&self, x: f64, x_prime: f64) -> f64 {
        self.inner.plane_corr(x, x_prime)
    }

    fn g_tilde(&self, x: f64, x_prime: f64) -> f64 {
        self.inner.g_tilde(x, x_prime)
    }

    /// The exponent F(x) as a complex number.
    fn phase_f(&self, x: f64) -> num_complex::Complex64 {
        self.inner.phase_f(x)
    }
}

#[pyfunction]
fn plane_kernel(xi: f64) -> PyResult<f64> {
    Ok(specfun::plane_kernel(
        specfun::KernelArg::new(xi).map_err(to_py)?,
    ))
}

#[pyfunction]
fn bessel_k(order: u32, x: f64) -> PyResult<f64> {
    specfun::bessel_k(order, x).map_err(to_py)
}

#[pyfunction]
fn struve_l(order: i32, x: f64) -> PyResult<f64> {
    specfun::struve_l(order, x).map_err(to_py)
}

#[pyfunction]
fn structure_factor(q: f64, positions: Vec<f64>) -> f64 {
    xsec::structure_factor(q, &positions)
}

/// Monte Carlo estimate of the configuration-averaged phase factor at (x, y).
///
/// Returns `(mean, std_error, cumulant_prediction, allowance)`.
#[pyfunction]
#[pyo3(signature = (setup, x, y = 0.0, n_samples = 100_000, seed = 12345))]
fn averaged_phase(
    py: Python<'_>,
    setup: &PySetup,
    x: f64,
    y: f64,
    n_samples: usize,
    seed: u64,
) -> PyResult<(num_complex::Complex64, f64, num_complex::Complex64, f64)> {
    let t = &setup.inner.target;
    let p = setup.inner.profile().map_err(to_py)?;
    let probe = mc::Probe {
        rho: mc::Point::new(x, y),
        rho_prime: None,
    };
    let e = py
        .detach(|| mc::averaged_phase_mc(t, &p, probe, n_samples, seed, mc::DEFAULT_ATOM_CAP))
        .map_err(to_py)?;
    let pred = mc::cumulant_prediction(t, &p, x);
    Ok((e.mean, e.std_error, pred.second_order, pred.allowance))
}

/// Runs a preset and writes its CSV files and JSON sidecar into `out_dir`.
///
/// Returns the written paths, sidecar last.
#[pyfunction]
#[pyo3(signature = (preset, out_dir, q_count = None))]
fn run_preset(
    py: Python<'_>,
    preset: &str,
    out_dir: PathBuf,
    q_count: Option<usize>,
) -> PyResult<Vec<PathBuf>> {
    let mut cfg = config::preset(preset).map_err(to_py)?;
    if let Some(n) = q_count {
        cfg.q_range.count = n;
    }
    let art = py.detach(|| app::run(&cfg, &out_dir)).map_err(to_py)?;
    let mut files = art.csv_files;
    files.push(art.sidecar);
    Ok(files)
}

#[pyfunction]
fn preset_names() -> Vec<String> {
    config::presets().into_iter().map(|p| p.name).collect()
}

/// `(name, passed, measured, tolerance)`.
type CheckRow = (String, bool, f64, f64);

/// Runs the validation suite on a preset; returns `(passed, [(name, passed, measured, tolerance)])`.
#[pyfunction]
fn validate_preset(
    py: Python<'_>,
    preset: &str,
) -> PyResult<(bool, Vec<CheckRow>)> {
    let run = config::preset(preset)
        .and_then(|c| c.resolve())
        .map_err(to_py)?;
    let report = py.detach(|| validate::validate(&run)).map_err(to_py)?;
    let checks = report
        .checks
        .into_iter()
        .map(|c| (c.name, c.passed, c.measured, c.tolerance))
        .collect();
    Ok((report.passed, checks))
}

#[pymodule]
fn planar_eikonal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySetup>()?;
    m.add_class::<PyChiProfile>()?;
    m.add_function(wrap_pyfunction!(plane_kernel, m)?)?;
    m.add_function(wrap_pyfunction!(bessel_k, m)?)?;
    m.add_function(wrap_pyfunction!(struve_l, m)?)?;
    m.add_function(wrap_pyfunction!(structure_factor, m)?)?;
    m.add_function(wrap_pyfunction!(averaged_phase, m)?)?;
    m.add_function(wrap_pyfunction!(run_preset, m)?)?;
    m.add_function(wrap_pyfunction!(preset_names, m)?)?;
    m.add_function(wrap_pyfunction!(validate_preset, m)?)?;
    m.add("CSV_COLUMNS", planar_eikonal::output::CSV_COLUMNS.to_vec())?;
    Ok(())
}
