//! Python bindings. Build the importable module with
//! `cargo build --release -p stirred-vacuum-py --features extension-module`
//! and copy `libstirred_vacuum_py.so` to `stirred_vacuum_py.so`.

use pyo3::exceptions::{PyArithmeticError, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stirred_vacuum::entanglement::{block_entropy, entanglement_links, entropy_profile};
use stirred_vacuum::evolve::{evolve_cycles, ground_state, Cadence, EvolveOptions, ModeMatrix, PropagatorCache, Propagation};
use stirred_vacuum::floquet::{floquet_data, floquet_occupations, SpacingOptions, Unfolding};
use stirred_vacuum::harness::{self, ExperimentConfig};
use stirred_vacuum::lattice::single_body_matrix;
use stirred_vacuum::observables::{energy, mode_occupations, site_densities, SineModes};
use stirred_vacuum::{floquet, rse, Error, HoppingMatrix, C64};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io(_) => PyOSError::new_err(e.to_string()),
        Error::Numerical(_) | Error::Quadrature(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn parse_cadence(s: &str) -> PyResult<Cadence> {
    match s {
        "cycle-start" => Ok(Cadence::CycleStart),
        "per-step" => Ok(Cadence::PerStep),
        other => Err(PyValueError::new_err(format!("unknown cadence {other:?}"))),
    }
}

#[pyclass(name = "ChainParams", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyChainParams {
    inner: stirred_vacuum::ChainParams,
}

#[pymethods]
impl PyChainParams {
    #[new]
    #[pyo3(signature = (n, tau, m=None))]
    fn new(n: usize, tau: f64, m: Option<usize>) -> PyResult<Self> {
        let inner = match m {
            Some(m) => stirred_vacuum::ChainParams::with_particles(n, tau, m),
            None => stirred_vacuum::ChainParams::new(n, tau),
        }
        .map_err(to_py)?;
        Ok(PyChainParams { inner })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn tau(&self) -> f64 {
        self.inner.tau()
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn positions(&self) -> usize {
        self.inner.positions()
    }

    #[getter]
    fn period(&self) -> f64 {
        self.inner.period()
    }

    fn __repr__(&self) -> String {
        format!("ChainParams(n={}, tau={}, m={})", self.inner.n(), self.inner.tau(), self.inner.m())
    }
}

/// Slater determinant stored as its `N × m` orbital matrix.
#[pyclass(name = "ModeState", from_py_object)]
#[derive(Clone)]
struct PyModeState {
    inner: ModeMatrix,
}

#[pymethods]
impl PyModeState {
    /// Ground state of the clean chain, or of the chain with the link after
    /// site `obstacle` (1-based) removed.
    #[staticmethod]
    #[pyo3(signature = (n, m=None, obstacle=None))]
    fn ground_state(n: usize, m: Option<usize>, obstacle: Option<usize>) -> PyResult<Self> {
        let h = HoppingMatrix::open_chain(n, obstacle).map_err(to_py)?;
        let inner = ground_state(&h, m.unwrap_or(n / 2)).map_err(to_py)?;
        Ok(PyModeState { inner })
    }

    /// Haar-random Slater determinant.
    #[staticmethod]
    fn random(n: usize, m: usize, seed: u64) -> PyResult<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inner = rse::sample_random_slater(n, m, &mut rng).map_err(to_py)?;
        Ok(PyModeState { inner })
    }

    #[getter]
    fn n_sites(&self) -> usize {
        self.inner.n_sites()
    }

    #[getter]
    fn n_particles(&self) -> usize {
        self.inner.n_particles()
    }

    fn orthonormality_defect(&self) -> f64 {
        self.inner.orthonormality_defect()
    }

    fn site_densities(&self) -> Vec<f64> {
        site_densities(&self.inner)
    }

    /// Orbital matrix as nested lists of `complex`.
    fn orbitals(&self) -> Vec<Vec<C64>> {
        let p = self.inner.phi();
        (0..p.nrows()).map(|i| p.row(i).iter().copied().collect()).collect()
    }

    /// Correlation kernel as nested lists of `complex`.
    fn correlation(&self) -> Vec<Vec<C64>> {
        let c = self.inner.correlation();
        (0..c.nrows()).map(|i| c.row(i).iter().copied().collect()).collect()
    }

    /// Energy under the clean chain or the chain with an obstacle.
    #[pyo3(signature = (obstacle=None))]
    fn energy(&self, obstacle: Option<usize>) -> PyResult<f64> {
        let h = HoppingMatrix::open_chain(self.inner.n_sites(), obstacle).map_err(to_py)?;
        energy(&self.inner, &h).map_err(to_py)
    }

    fn mode_occupations(&self) -> PyResult<Vec<f64>> {
        let modes = SineModes::new(self.inner.n_sites());
        Ok(mode_occupations(&self.inner, &modes).map_err(to_py)?.0)
    }

    /// Entropy of the sites `start..stop`.
    fn entropy(&self, start: usize, stop: usize) -> PyResult<f64> {
        block_entropy(&self.inner, start..stop).map_err(to_py)
    }

    fn entropy_profile(&self) -> Vec<f64> {
        entropy_profile(&self.inner)
    }

    /// Entanglement links as a dict with `links` (N×N) and `fractions`.
    fn links<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let t = entanglement_links(&self.inner).map_err(to_py)?;
        let n = t.n();
        let links: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| t.links[(i, j)]).collect()).collect();
        let d = PyDict::new(py);
        d.set_item("links", links)?;
        d.set_item("fractions", t.fractions)?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("ModeState(n_sites={}, n_particles={})", self.inner.n_sites(), self.inner.n_particles())
    }
}

/// Evolves `state` for `cycles` periods. Returns the final state and one
/// `(cycle, step, time, obstacle, energy, half_chain_entropy)` tuple per
/// sample.
#[pyfunction]
#[pyo3(signature = (state, params, cycles, cadence="cycle-start", reorthonormalize_every=1))]
fn evolve(
    py: Python<'_>,
    state: PyModeState,
    params: PyChainParams,
    cycles: usize,
    cadence: &str,
    reorthonormalize_every: usize,
) -> PyResult<(PyModeState, Vec<(usize, usize, f64, usize, f64, f64)>)> {
    let opts = EvolveOptions {
        cadence: parse_cadence(cadence)?,
        reorthonormalize_every,
        propagation: Propagation::Auto,
    };
    py.detach(|| {
        let cache = PropagatorCache::new(params.inner)?;
        let n = params.inner.n();
        let mut rows = Vec::new();
        let mut failure = None;
        let fin = evolve_cycles(state.inner, &cache, cycles, opts, |s| {
            let rec = energy(s.state, s.hamiltonian).and_then(|e| Ok((e, block_entropy(s.state, 0..n / 2)?)));
            match rec {
                Ok((e, ent)) => rows.push((s.cycle, s.step, s.time, s.obstacle, e, ent)),
                Err(err) => failure = failure.take().or(Some(err)),
            }
        })?;
        match failure {
            Some(e) => Err(e),
            None => Ok((PyModeState { inner: fin }, rows)),
        }
    })
    .map_err(to_py)
}

/// Quasi-energies, mean `r̃` and the Floquet occupations of the ground state.
#[pyfunction]
fn floquet_spectrum<'py>(py: Python<'py>, n: usize, tau: f64) -> PyResult<Bound<'py, PyDict>> {
    let (quasi, r, occ) = py
        .detach(|| -> stirred_vacuum::Result<_> {
            let params = stirred_vacuum::ChainParams::new(n, tau)?;
            let cache = PropagatorCache::new(params)?;
            let data = floquet_data(&cache)?;
            let stats = floquet::spacing_statistics(&data.quasi, SpacingOptions::default())?;
            let gs = ground_state(&single_body_matrix(&params, None)?, params.m())?;
            let occ = floquet_occupations(&data, &gs)?;
            Ok((data.quasi, stats.r_tilde_mean, occ.0))
        })
        .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("quasi_energies", quasi)?;
    d.set_item("r_tilde_mean", r)?;
    d.set_item("occupations", occ)?;
    Ok(d)
}

/// Spacing statistics of an arbitrary spectrum.
#[pyfunction]
#[pyo3(signature = (levels, edge_trim=None, window=None))]
fn spacing_statistics<'py>(
    py: Python<'py>,
    levels: Vec<f64>,
    edge_trim: Option<usize>,
    window: Option<usize>,
) -> PyResult<Bound<'py, PyDict>> {
    let opts = SpacingOptions {
        edge_trim,
        unfolding: window.map_or(Unfolding::Global, Unfolding::LocalWindow),
    };
    let s = floquet::spacing_statistics(&levels, opts).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("spacings", s.spacings)?;
    d.set_item("normalized", s.normalized)?;
    d.set_item("ratios", s.ratios)?;
    d.set_item("r_tilde_mean", s.r_tilde_mean)?;
    Ok(d)
}

/// Block entropies (`entropies[b][s]`) and pooled `2ν − 1` spectra of random
/// Slater samples.
#[pyfunction]
fn sample_ensemble<'py>(
    py: Python<'py>,
    n: usize,
    m: usize,
    ells: Vec<usize>,
    samples: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let s = py.detach(|| rse::sample_ensemble(n, m, &ells, samples, seed)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("ells", s.ells)?;
    d.set_item("entropies", s.entropies)?;
    d.set_item("lambdas", s.lambdas)?;
    Ok(d)
}

#[pyfunction]
fn entropy_exact(ell: usize, n: usize, m: usize) -> PyResult<f64> {
    rse::entropy_exact(ell, n, m).map_err(to_py)
}

#[pyfunction]
fn entropy_approx(ell: usize, n: usize) -> PyResult<f64> {
    rse::entropy_approx(ell, n).map_err(to_py)
}

#[pyfunction]
fn entropy_variance(ell: usize, n: usize, m: usize) -> PyResult<f64> {
    rse::entropy_variance(ell, n, m).map_err(to_py)
}

#[pyfunction]
fn page_law(ell: usize, n: usize) -> PyResult<f64> {
    rse::page_law(ell, n).map_err(to_py)
}

#[pyfunction]
fn jacobi_density(mu: f64, lam: f64) -> PyResult<f64> {
    rse::jacobi_density(mu, lam).map_err(to_py)
}

#[pyfunction]
fn jacobi_cdf(mu: f64, lam: f64) -> PyResult<f64> {
    rse::jacobi_cdf(mu, lam).map_err(to_py)
}

#[pyfunction]
fn mean_h2_closed(mu: f64) -> PyResult<f64> {
    rse::mean_h2_closed(mu).map_err(to_py)
}

#[pyfunction]
fn mean_h2_quadrature(mu: f64) -> PyResult<f64> {
    rse::mean_h2_quadrature(mu).map_err(to_py)
}

#[pyfunction]
fn digamma(x: f64) -> PyResult<f64> {
    rse::digamma(x).map_err(to_py)
}

#[pyfunction]
fn rebound_time(n: usize, tau: f64) -> PyResult<f64> {
    harness::rebound_time(n, tau).map_err(to_py)
}

/// Runs an experiment from a JSON config and returns the summary as JSON.
#[pyfunction]
fn run_experiment(py: Python<'_>, config_json: &str) -> PyResult<String> {
    let cfg: ExperimentConfig =
        serde_json::from_str(config_json).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let (result, _) = py.detach(|| harness::run_experiment(&cfg)).map_err(to_py)?;
    serde_json::to_string(&result.summary).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Analytic cross-checks as `(name, error, tolerance, passed)` tuples.
#[pyfunction]
fn verify() -> PyResult<Vec<(String, f64, f64, bool)>> {
    let checks = harness::verify::run_checks().map_err(to_py)?;
    Ok(checks.into_iter().map(|c| (c.name, c.error, c.tolerance, c.pass)).collect())
}

#[pymodule]
fn stirred_vacuum_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyChainParams>()?;
    m.add_class::<PyModeState>()?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(floquet_spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(spacing_statistics, m)?)?;
    m.add_function(wrap_pyfunction!(sample_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_exact, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_approx, m)?)?;
    m.add_function(wrap_pyfunction!(entropy_variance, m)?)?;
    m.add_function(wrap_pyfunction!(page_law, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_density, m)?)?;
    m.add_function(wrap_pyfunction!(jacobi_cdf, m)?)?;
    m.add_function(wrap_pyfunction!(mean_h2_closed, m)?)?;
    m.add_function(wrap_pyfunction!(mean_h2_quadrature, m)?)?;
    m.add_function(wrap_pyfunction!(digamma, m)?)?;
    m.add_function(wrap_pyfunction!(rebound_time, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
