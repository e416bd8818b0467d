//! Python bindings: loops, the node, subspace triples, dimension formulas,
//! neck energies, and the scenario runner behind the `hardy-node` command.

use hardy_node_core as core;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use core::cli::{self, Settings};
use core::moduli_index::{Field, TargetData};

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn hardy_part(name: &str) -> PyResult<core::HardyPart> {
    match name {
        "plus" => Ok(core::HardyPart::Plus),
        "minus" => Ok(core::HardyPart::Minus),
        "constant" => Ok(core::HardyPart::Constant),
        other => Err(value_error(format!("unknown Hardy part {other:?}; use plus, minus or constant"))),
    }
}

/// A truncated `ℂᵐ`-valued Fourier loop with modes `-n_max..=n_max`.
#[pyclass(name = "Loop", module = "hardy_node", from_py_object)]
#[derive(Clone)]
pub struct PyLoop {
    inner: core::Loop,
}

#[pymethods]
impl PyLoop {
    /// `coeffs[k]` holds the `m` coefficients of mode `k - n_max`.
    #[new]
    fn new(m: usize, n_max: usize, coeffs: Vec<Vec<Complex64>>) -> PyResult<Self> {
        core::Loop::new(m, n_max, coeffs).map(|inner| PyLoop { inner }).map_err(value_error)
    }

    /// Scalar loop from `{mode: coefficient}`.
    #[staticmethod]
    fn scalar(n_max: usize, modes: Vec<(i64, Complex64)>) -> PyResult<Self> {
        core::Loop::scalar(n_max, &modes).map(|inner| PyLoop { inner }).map_err(value_error)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text).map(|inner| PyLoop { inner }).map_err(value_error)
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(value_error)
    }

    #[getter]
    fn m(&self) -> usize {
        self.inner.m()
    }

    #[getter]
    fn n_max(&self) -> usize {
        self.inner.n_max()
    }

    fn coeff(&self, n: i64) -> Vec<Complex64> {
        self.inner.coeff_or_zero(n)
    }

    fn sobolev_norm(&self, s: f64) -> PyResult<f64> {
        self.inner.sobolev_norm(s).map_err(value_error)
    }

    /// `part` is one of `"plus"`, `"minus"`, `"constant"`.
    fn hardy_project(&self, part: &str) -> PyResult<Self> {
        Ok(PyLoop { inner: self.inner.hardy_project(hardy_part(part)?) })
    }

    fn winding_number(&self, tol: f64) -> PyResult<i64> {
        self.inner.winding_number(tol).map_err(value_error)
    }

    /// Value of the Laurent series at `point` inside `r_in <= |point| <= r_out`.
    fn laurent_eval(&self, point: Complex64, r_in: f64, r_out: f64) -> PyResult<Vec<Complex64>> {
        self.inner.laurent_eval(point, r_in, r_out).map_err(value_error)
    }

    fn __repr__(&self) -> String {
        format!("Loop(m={}, n_max={})", self.inner.m(), self.inner.n_max())
    }
}

/// Applies the transfer operator `𝒯_z` to positive-mode data.
#[pyfunction]
fn transfer(z: Complex64, plus: &PyLoop) -> PyResult<PyLoop> {
    core::node_model::transfer(z, &plus.inner).map(|inner| PyLoop { inner }).map_err(value_error)
}

/// Relative residual of the node relations for boundary data `(z, ξ, η)`.
#[pyfunction]
fn membership_residual(z: Complex64, xi: &PyLoop, eta: &PyLoop, s: f64) -> PyResult<f64> {
    let b = core::node_model::NodeBoundary::new(z, xi.inner.clone(), eta.inner.clone()).map_err(value_error)?;
    core::node_model::membership_residual(&b, s).map_err(value_error)
}

/// Boundary loops `(ξ, η)` of the chart `(z, ξ₊, η₊, λ)`.
#[pyfunction]
fn node_chart(z: Complex64, xi_plus: &PyLoop, eta_plus: &PyLoop, lambda: Vec<Complex64>) -> PyResult<(PyLoop, PyLoop)> {
    let c = core::node_model::NodeChart::new(z, xi_plus.inner.clone(), eta_plus.inner.clone(), lambda)
        .map_err(value_error)?;
    let (_, xi, eta) = core::node_model::node_chart(&c).into_parts();
    Ok((PyLoop { inner: xi }, PyLoop { inner: eta }))
}

/// Chart coordinates `(ξ₊, η₊, λ)` of boundary data on the node.
#[pyfunction]
fn node_chart_inverse(
    z: Complex64,
    xi: &PyLoop,
    eta: &PyLoop,
    s: f64,
    tol: f64,
) -> PyResult<(PyLoop, PyLoop, Vec<Complex64>)> {
    let b = core::node_model::NodeBoundary::new(z, xi.inner.clone(), eta.inner.clone()).map_err(value_error)?;
    let c = core::node_model::node_chart_inverse(&b, s, tol).map_err(value_error)?;
    Ok((
        PyLoop { inner: c.xi_plus().clone() },
        PyLoop { inner: c.eta_plus().clone() },
        c.lambda().to_vec(),
    ))
}

/// Whether `ξ` extends holomorphically over the unit disk, with its defect.
#[pyfunction]
fn disk_extension_test(xi: &PyLoop, s: f64, tol: f64) -> PyResult<(bool, f64)> {
    let e = core::extension::disk_extension_test(&xi.inner, s, tol).map_err(value_error)?;
    Ok((e.extends(), e.defect()))
}

/// Dirichlet energy of the Laurent series `f` on `r < |x| < big_r`.
#[pyfunction]
fn annulus_energy(f: &PyLoop, r: f64, big_r: f64) -> PyResult<f64> {
    core::degeneration::annulus_energy(&f.inner, r, big_r).map_err(value_error)
}

/// Two subspaces of `ℂᴺ` given by column bases (lists of rows).
#[pyclass(name = "SubspaceTriple", module = "hardy_node", from_py_object)]
#[derive(Clone)]
pub struct PyTriple {
    inner: core::fredholm::SubspaceTriple,
}

fn matrix(rows: &[Vec<Complex64>], nrows: usize) -> PyResult<core::linalg::CMatrix> {
    if rows.len() != nrows {
        return Err(value_error(format!("basis has {} rows, expected {nrows}", rows.len())));
    }
    let ncols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != ncols) {
        return Err(value_error("ragged basis rows"));
    }
    Ok(core::linalg::CMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

#[pymethods]
impl PyTriple {
    #[new]
    #[pyo3(signature = (ambient_dim, basis_prime, basis_dprime, rank_tol = core::fredholm::DEFAULT_RANK_TOL))]
    fn new(
        ambient_dim: usize,
        basis_prime: Vec<Vec<Complex64>>,
        basis_dprime: Vec<Vec<Complex64>>,
        rank_tol: f64,
    ) -> PyResult<Self> {
        let b1 = matrix(&basis_prime, ambient_dim)?;
        let b2 = matrix(&basis_dprime, ambient_dim)?;
        core::fredholm::SubspaceTriple::new(ambient_dim, b1, b2, rank_tol)
            .map(|inner| PyTriple { inner })
            .map_err(value_error)
    }

    /// Coordinate subspaces spanned by the listed standard basis vectors.
    #[staticmethod]
    fn coordinate(ambient_dim: usize, prime: Vec<usize>, dprime: Vec<usize>) -> PyResult<Self> {
        core::fredholm::SubspaceTriple::coordinate(ambient_dim, &prime, &dprime)
            .map(|inner| PyTriple { inner })
            .map_err(value_error)
    }

    /// `(dim_cap, codim_sum, index)`.
    fn index(&self) -> (usize, usize, i64) {
        let i = self.inner.index();
        (i.dim_cap, i.codim_sum, i.index)
    }

    fn spectral_gap(&self) -> f64 {
        self.inner.spectral_gap()
    }

    #[getter]
    fn ambient_dim(&self) -> usize {
        self.inner.ambient_dim()
    }

    fn __repr__(&self) -> String {
        format!("SubspaceTriple(N={}, p={}, q={})", self.inner.ambient_dim(), self.inner.p(), self.inner.q())
    }
}

#[pyfunction]
fn hardy_triple_for_line_bundle(deg2d: usize, truncation: usize) -> PyResult<PyTriple> {
    core::moduli_index::hardy_triple_for_line_bundle(deg2d, truncation)
        .map(|h| PyTriple { inner: h.triple })
        .map_err(value_error)
}

#[pyfunction]
fn hardy_split_triple(m: usize, truncation: usize) -> PyResult<PyTriple> {
    core::moduli_index::hardy_split_triple(m, truncation).map(|h| PyTriple { inner: h.triple }).map_err(value_error)
}

#[pyfunction]
fn moduli_dimension(g: u32, n: u32, m: u32, c1d: i64) -> i64 {
    core::moduli_index::moduli_dimension(g, n, TargetData { m, c1d })
}

/// `field` is `"complex"` or `"real"`.
#[pyfunction]
#[pyo3(signature = (m, c1d, g, field = "complex"))]
fn riemann_roch_index(m: u32, c1d: i64, g: u32, field: &str) -> PyResult<i64> {
    let field = match field {
        "complex" => Field::Complex,
        "real" => Field::Real,
        other => return Err(value_error(format!("unknown field {other:?}"))),
    };
    Ok(core::moduli_index::riemann_roch_index(TargetData { m, c1d }, g, field))
}

#[pyfunction]
fn teichmuller_dim(g: u32, n: u32) -> i64 {
    core::moduli_index::teichmuller_dim(g, n)
}

/// Runs one JSON scenario through a `hardy-node` subcommand and returns the
/// JSON-lines report.
#[pyfunction]
#[pyo3(signature = (command, scenario, truncation = 32, sobolev_s = 1.5, tol = 1e-10, seed = 0))]
fn run_scenario(
    command: &str,
    scenario: &str,
    truncation: usize,
    sobolev_s: f64,
    tol: f64,
    seed: u64,
) -> PyResult<String> {
    let handler: fn(&str, &Settings) -> cli::scenarios::Outcome = match command {
        "node-check" => cli::scenarios::node_check,
        "extend-check" => cli::scenarios::extend_check,
        "index" => cli::scenarios::index,
        "reduce" => cli::scenarios::reduce,
        "intersect" => cli::scenarios::intersect,
        "energy" => cli::scenarios::energy,
        "moduli-dim" => cli::scenarios::moduli_dim,
        other => return Err(value_error(format!("unknown command {other:?}"))),
    };
    let st = Settings { truncation, sobolev_s, tol, seed };
    cli::run_scenario(command, handler, "python", scenario.as_bytes(), &st)
        .map(|r| r.to_json_lines())
        .map_err(value_error)
}

#[pymodule]
fn hardy_node(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyLoop>()?;
    m.add_class::<PyTriple>()?;
    m.add_function(wrap_pyfunction!(transfer, m)?)?;
    m.add_function(wrap_pyfunction!(membership_residual, m)?)?;
    m.add_function(wrap_pyfunction!(node_chart, m)?)?;
    m.add_function(wrap_pyfunction!(node_chart_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(disk_extension_test, m)?)?;
    m.add_function(wrap_pyfunction!(annulus_energy, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_triple_for_line_bundle, m)?)?;
    m.add_function(wrap_pyfunction!(hardy_split_triple, m)?)?;
    m.add_function(wrap_pyfunction!(moduli_dimension, m)?)?;
    m.add_function(wrap_pyfunction!(riemann_roch_index, m)?)?;
    m.add_function(wrap_pyfunction!(teichmuller_dim, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    Ok(())
}
