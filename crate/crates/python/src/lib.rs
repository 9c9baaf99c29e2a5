//! Python bindings for `fgn-lan`.
//!
//! Scalars and vectors cross as Python floats and lists; reports come back as
//! plain dictionaries. Campaign functions take a configuration mapping (or its
//! JSON text) with the fields of `CampaignConfig`.

use fgn_lan::error::Error;
use fgn_lan::experiments::{self, CampaignConfig};
use fgn_lan::fgn_model::{self, Hurst, SpectralTruncation};
use fgn_lan::fisher;
use fgn_lan::likelihood::{self, Observation};
use fgn_lan::rate_matrix::{self, RateKind, SamplingScheme};
use fgn_lan::simulate::{self, Method, SimConfig};
use fgn_lan::toeplitz;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: Error) -> PyErr {
    if e.is_validation() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

trait IntoPy<T> {
    fn py(self) -> PyResult<T>;
}

impl<T> IntoPy<T> for fgn_lan::Result<T> {
    fn py(self) -> PyResult<T> {
        self.map_err(err)
    }
}

/// Serialisable value to a Python object via JSON.
fn to_py<'py, T: Serialize>(py: Python<'py>, v: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = match obj.extract::<String>() {
        Ok(s) => s,
        Err(_) => obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?,
    };
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn matrix(m: &nalgebra::Matrix2<f64>) -> [[f64; 2]; 2] {
    [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
}

fn to_hurst(h: f64) -> PyResult<Hurst> {
    Hurst::new(h).py()
}

fn method(name: &str) -> PyResult<Method> {
    match name {
        "circulant" => Ok(Method::Circulant),
        "cholesky" => Ok(Method::Cholesky),
        other => Err(PyValueError::new_err(format!("unknown method '{other}'"))),
    }
}

/// Parameter pair `(H, sigma)`.
#[pyclass(module = "fgn_lan", frozen, eq, from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct Theta(fgn_model::Theta);

#[pymethods]
impl Theta {
    #[new]
    fn new(hurst: f64, sigma: f64) -> PyResult<Self> {
        fgn_model::Theta::new(hurst, sigma).py().map(Theta)
    }

    #[getter]
    fn hurst(&self) -> f64 {
        self.0.h()
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.0.sigma()
    }

    fn __repr__(&self) -> String {
        format!("Theta(hurst={}, sigma={})", self.0.h(), self.0.sigma())
    }
}

/// `T_n(H)` with its Levinson-Durbin factorisation.
#[pyclass(module = "fgn_lan", frozen)]
struct ToeplitzModel(toeplitz::ToeplitzModel);

#[pymethods]
impl ToeplitzModel {
    #[new]
    fn new(hurst: f64, n: usize) -> PyResult<Self> {
        toeplitz::ToeplitzModel::new(to_hurst(hurst)?, n).py().map(ToeplitzModel)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn hurst(&self) -> f64 {
        self.0.hurst().get()
    }

    #[getter]
    fn logdet(&self) -> f64 {
        self.0.logdet()
    }

    /// `x' T^{-1} x`.
    fn quad_inv(&self, x: Vec<f64>) -> PyResult<f64> {
        self.0.quad_inv(&x).py()
    }

    /// `T^{-1} x`.
    fn solve(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.0.solve(&x).py()
    }

    /// `x' T^{-1} x` and its first two H-derivatives.
    fn quad_forms(&self, x: Vec<f64>) -> PyResult<(f64, f64, f64)> {
        let q = self.0.quad_forms(&x).py()?;
        Ok((q.q0, q.q1, q.q2))
    }

    /// `log|T|` and its first two H-derivatives.
    fn logdet_derivatives(&self) -> PyResult<(f64, f64, f64)> {
        let d = self.0.logdet_derivatives().py()?;
        Ok((d.logdet, d.dh, d.d2h))
    }
}

/// Likelihood evaluator sharing one model cache across calls.
#[pyclass(module = "fgn_lan", frozen)]
struct Likelihood(likelihood::Likelihood);

#[pymethods]
impl Likelihood {
    #[new]
    fn new() -> Self {
        Likelihood(likelihood::Likelihood::new())
    }

    fn loglik(&self, theta: Theta, x: Vec<f64>, delta: f64) -> PyResult<f64> {
        let obs = Observation::new(x, delta).py()?;
        self.0.loglik(theta.0, &obs).py()
    }

    fn stats<'py>(&self, py: Python<'py>, theta: Theta, x: Vec<f64>, delta: f64) -> PyResult<Bound<'py, PyAny>> {
        let obs = Observation::new(x, delta).py()?;
        to_py(py, &self.0.stats(theta.0, &obs).py()?)
    }

    fn score(&self, theta: Theta, x: Vec<f64>, delta: f64) -> PyResult<[f64; 2]> {
        let obs = Observation::new(x, delta).py()?;
        self.0.score(theta.0, &obs).py()
    }

    fn cached_models(&self) -> usize {
        self.0.cache().len()
    }
}

/// One rate matrix `phi_n` of a named family.
#[pyclass(module = "fgn_lan", frozen)]
struct RateMatrix(rate_matrix::RateMatrix);

#[pymethods]
impl RateMatrix {
    #[new]
    #[pyo3(signature = (kind, n, delta, sigma=1.0, gamma=1.0, gamma_hat=-1.0))]
    fn new(kind: &str, n: usize, delta: f64, sigma: f64, gamma: f64, gamma_hat: f64) -> PyResult<Self> {
        let k = RateKind::parse(kind, gamma, gamma_hat).py()?;
        rate_matrix::example(k, n, delta, sigma).py().map(RateMatrix)
    }

    #[getter]
    fn matrix(&self) -> [[f64; 2]; 2] {
        matrix(&self.0.matrix())
    }

    #[getter]
    fn det(&self) -> f64 {
        self.0.det()
    }

    fn apply(&self, u: [f64; 2]) -> [f64; 2] {
        self.0.apply(u)
    }

    fn inverse(&self) -> PyResult<[[f64; 2]; 2]> {
        Ok(matrix(&self.0.inverse().py()?))
    }

    fn gamma_n(&self, sigma: f64) -> (f64, f64) {
        self.0.gamma_n(sigma)
    }
}

#[pyfunction]
fn autocov(hurst: f64, k: i64) -> PyResult<f64> {
    Ok(fgn_model::autocov(to_hurst(hurst)?, k))
}

#[pyfunction]
fn spectral_density(hurst: f64, lam: f64) -> PyResult<f64> {
    fgn_model::spectral_density(to_hurst(hurst)?, lam, SpectralTruncation::default()).py()
}

/// One fGn path of `n` increments sampled every `delta`.
#[pyfunction]
#[pyo3(name = "simulate", signature = (hurst, sigma, n, delta, seed=1, method="circulant"))]
fn simulate_path(hurst: f64, sigma: f64, n: usize, delta: f64, seed: u64, method: &str) -> PyResult<Vec<f64>> {
    let theta = fgn_model::Theta::new(hurst, sigma).py()?;
    let cfg = SimConfig { method: self::method(method)?, ..SimConfig::new(theta, n, delta, seed) };
    Ok(simulate::sample(&cfg).py()?.x().to_vec())
}

/// Maps a path to i.i.d. standard normals under `theta`.
#[pyfunction]
fn whiten(theta: Theta, x: Vec<f64>, delta: f64) -> PyResult<Vec<f64>> {
    simulate::whiten(&Observation::new(x, delta).py()?, theta.0).py()
}

#[pyfunction]
fn loglik(theta: Theta, x: Vec<f64>, delta: f64) -> PyResult<f64> {
    likelihood::loglik(theta.0, &Observation::new(x, delta).py()?).py()
}

/// Statistics `loglik, A, B, C, D, E` as a dictionary.
#[pyfunction]
fn stats<'py>(py: Python<'py>, theta: Theta, x: Vec<f64>, delta: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &likelihood::stats(theta.0, &Observation::new(x, delta).py()?).py()?)
}

#[pyfunction]
fn score(theta: Theta, x: Vec<f64>, delta: f64) -> PyResult<[f64; 2]> {
    likelihood::score(theta.0, &Observation::new(x, delta).py()?).py()
}

/// `(i1, i2, quad_error)`.
#[pyfunction]
#[pyo3(signature = (hurst, nodes=fisher::DEFAULT_NODES))]
fn spectral_integrals(hurst: f64, nodes: usize) -> PyResult<(f64, f64, f64)> {
    let s = fisher::spectral_integrals(to_hurst(hurst)?, nodes).py()?;
    Ok((s.i1, s.i2, s.quad_error))
}

#[pyfunction]
fn j_matrix(hurst: f64) -> PyResult<[[f64; 2]; 2]> {
    Ok(matrix(&fisher::j_matrix(to_hurst(hurst)?).py()?))
}

#[pyfunction]
fn i_large_sample(theta: Theta) -> PyResult<[[f64; 2]; 2]> {
    Ok(matrix(&fisher::i_large_sample(theta.0).py()?))
}

/// `M J M^T` for the limits of a named rate-matrix family.
#[pyfunction]
#[pyo3(signature = (theta, kind, gamma=1.0, gamma_hat=-1.0))]
fn i_high_frequency(theta: Theta, kind: &str, gamma: f64, gamma_hat: f64) -> PyResult<[[f64; 2]; 2]> {
    let limits = RateKind::parse(kind, gamma, gamma_hat).py()?.limits(theta.0.sigma());
    Ok(matrix(&fisher::i_high_frequency(theta.0, &limits).py()?.i_hf))
}

/// Verdicts on the six rate-matrix conditions along `delta_n = c n^(-tau)`.
#[pyfunction]
#[pyo3(signature = (kind, n_grid, delta_c=1.0, tau=0.5, sigma=1.0, gamma=1.0, gamma_hat=-1.0))]
fn check_conditions<'py>(
    py: Python<'py>,
    kind: &str,
    n_grid: Vec<usize>,
    delta_c: f64,
    tau: f64,
    sigma: f64,
    gamma: f64,
    gamma_hat: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let k = RateKind::parse(kind, gamma, gamma_hat).py()?;
    let scheme = SamplingScheme::power(delta_c, tau, n_grid).py()?;
    to_py(py, &rate_matrix::check_conditions(k, &scheme, sigma))
}

/// Maximum likelihood estimate of `(H, sigma)`.
#[pyfunction]
fn mle_fit<'py>(py: Python<'py>, x: Vec<f64>, delta: f64) -> PyResult<Bound<'py, PyAny>> {
    let obs = Observation::new(x, delta).py()?;
    let fit = py.detach(|| experiments::mle_fit(&obs)).py()?;
    to_py(py, &fit)
}

/// Lower bounds `(v_H, v_sigma)` on the scaled mean squared errors.
#[pyfunction]
fn efficiency_bounds(theta: Theta) -> PyResult<(f64, f64)> {
    let (vh, vs) = experiments::efficiency_bounds(theta.0).py()?;
    Ok((vh, theta.0.sigma().powi(2) * vs))
}

fn campaign<'py, T: Serialize + Send>(
    config: &Bound<'py, PyAny>,
    workers: usize,
    f: fn(&CampaignConfig) -> fgn_lan::Result<T>,
) -> PyResult<Bound<'py, PyAny>> {
    let py = config.py();
    let cfg: CampaignConfig = from_py(config)?;
    let report = py.detach(|| experiments::with_workers(workers, || f(&cfg))).py()?.py()?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (config, workers=0))]
fn mc_score_cov<'py>(config: &Bound<'py, PyAny>, workers: usize) -> PyResult<Bound<'py, PyAny>> {
    campaign(config, workers, experiments::mc_score_cov)
}

#[pyfunction]
#[pyo3(signature = (config, workers=0))]
fn mc_lan<'py>(config: &Bound<'py, PyAny>, workers: usize) -> PyResult<Bound<'py, PyAny>> {
    campaign(config, workers, experiments::mc_lan)
}

#[pyfunction]
#[pyo3(signature = (config, workers=0))]
fn rate_sweep<'py>(config: &Bound<'py, PyAny>, workers: usize) -> PyResult<Bound<'py, PyAny>> {
    campaign(config, workers, experiments::rate_sweep)
}

#[pyfunction]
#[pyo3(signature = (config, workers=0))]
fn kawai_singular<'py>(config: &Bound<'py, PyAny>, workers: usize) -> PyResult<Bound<'py, PyAny>> {
    campaign(config, workers, experiments::kawai_singular)
}

/// Runs the command line with `args` (without the program name) and returns its exit code.
#[pyfunction]
fn cli(py: Python<'_>, args: Vec<String>) -> i32 {
    let argv: Vec<String> = std::iter::once("fgn-lan".to_string()).chain(args).collect();
    py.detach(|| fgn_lan::cli::run(argv))
}

#[pymodule]
#[pyo3(name = "fgn_lan")]
fn fgn_lan_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<Theta>()?;
    m.add_class::<ToeplitzModel>()?;
    m.add_class::<Likelihood>()?;
    m.add_class::<RateMatrix>()?;
    m.add_function(wrap_pyfunction!(autocov, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_density, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_path, m)?)?;
    m.add_function(wrap_pyfunction!(whiten, m)?)?;
    m.add_function(wrap_pyfunction!(loglik, m)?)?;
    m.add_function(wrap_pyfunction!(stats, m)?)?;
    m.add_function(wrap_pyfunction!(score, m)?)?;
    m.add_function(wrap_pyfunction!(spectral_integrals, m)?)?;
    m.add_function(wrap_pyfunction!(j_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(i_large_sample, m)?)?;
    m.add_function(wrap_pyfunction!(i_high_frequency, m)?)?;
    m.add_function(wrap_pyfunction!(check_conditions, m)?)?;
    m.add_function(wrap_pyfunction!(mle_fit, m)?)?;
    m.add_function(wrap_pyfunction!(efficiency_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(mc_score_cov, m)?)?;
    m.add_function(wrap_pyfunction!(mc_lan, m)?)?;
    m.add_function(wrap_pyfunction!(rate_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(kawai_singular, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    Ok(())
}
