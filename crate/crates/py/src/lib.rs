//! Python bindings for the material distribution analyzer.
//!
//! Exposes the jet arithmetic, the constitutive-law catalog and parser, the
//! per-point solver and the grid classifier as a `matdist_py` extension
//! module. Matrices cross the boundary as nested lists; the second-order
//! block is a list of `n` matrices indexed `[j][i][k]`.

use matdist_core::dsl::{catalog, evaluate, parse_law, print_law, LawExpr, CATALOG_NAMES};
use matdist_core::field::{analyze_grid, BodyGrid, FieldConfig};
use matdist_core::jet::{compose, identity_jet, inverse, is_holonomic, Jet};
use matdist_core::material::{is_material_isomorphism, solve_point, SolverConfig};
use matdist_core::tensor::Tensor3;
use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: matdist_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from(rows: &[Vec<f64>], n: usize, what: &str) -> PyResult<DMatrix<f64>> {
    if rows.len() != n || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err(format!("{what}: expected {n}x{n} matrix")));
    }
    Ok(DMatrix::from_fn(n, n, |j, i| rows[j][i]))
}

fn matrix_to(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|j| (0..m.ncols()).map(|i| m[(j, i)]).collect())
        .collect()
}

/// A second-order two-point jet.
#[pyclass(name = "Jet", skip_from_py_object)]
#[derive(Clone)]
struct PyJet {
    inner: Jet,
}

#[pymethods]
impl PyJet {
    #[new]
    fn new(
        x: Vec<f64>,
        y: Vec<f64>,
        a: Vec<Vec<f64>>,
        b: Vec<Vec<f64>>,
        c: Vec<Vec<Vec<f64>>>,
    ) -> PyResult<Self> {
        let n = x.len();
        if y.len() != n {
            return Err(PyValueError::new_err("x and y must have the same length"));
        }
        let a = matrix_from(&a, n, "a")?;
        let b = matrix_from(&b, n, "b")?;
        if c.len() != n || c.iter().any(|s| s.len() != n || s.iter().any(|r| r.len() != n)) {
            return Err(PyValueError::new_err(format!("c: expected {n}x{n}x{n} tensor")));
        }
        let c = Tensor3::from_fn(n, |j, i, k| c[j][i][k]);
        let inner = Jet::new(DVector::from_vec(x), DVector::from_vec(y), a, b, c).map_err(err)?;
        Ok(PyJet { inner })
    }

    /// The identity jet at a point.
    #[staticmethod]
    fn identity(x: Vec<f64>) -> Self {
        PyJet {
            inner: identity_jet(&DVector::from_vec(x)),
        }
    }

    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.inner.x.iter().copied().collect()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.inner.y.iter().copied().collect()
    }

    #[getter]
    fn a(&self) -> Vec<Vec<f64>> {
        matrix_to(&self.inner.a)
    }

    #[getter]
    fn b(&self) -> Vec<Vec<f64>> {
        matrix_to(&self.inner.b)
    }

    #[getter]
    fn c(&self) -> Vec<Vec<Vec<f64>>> {
        let n = self.inner.dim();
        (0..n)
            .map(|j| {
                (0..n)
                    .map(|i| (0..n).map(|k| self.inner.c[(j, i, k)]).collect())
                    .collect()
            })
            .collect()
    }

    /// Composition `self . other`; `other` maps into the source of `self`.
    fn compose(&self, other: &PyJet) -> PyResult<Self> {
        Ok(PyJet {
            inner: compose(&self.inner, &other.inner).map_err(err)?,
        })
    }

    fn inverse(&self) -> PyResult<Self> {
        Ok(PyJet {
            inner: inverse(&self.inner).map_err(err)?,
        })
    }

    #[pyo3(signature = (tol = 1e-9))]
    fn is_holonomic(&self, tol: f64) -> bool {
        is_holonomic(&self.inner, tol)
    }

    fn max_diff(&self, other: &PyJet) -> f64 {
        self.inner.max_diff(&other.inner)
    }

    fn __repr__(&self) -> String {
        format!(
            "Jet(n={}, x={:?}, y={:?})",
            self.inner.dim(),
            self.x(),
            self.y()
        )
    }
}

/// A constitutive law: a vector-valued expression in the jet coordinates.
#[pyclass(name = "Law")]
struct PyLaw {
    inner: LawExpr,
    label: String,
    n: usize,
}

#[pymethods]
impl PyLaw {
    /// Look up a named law from the built-in catalog.
    #[staticmethod]
    fn catalog(name: &str, n: usize) -> PyResult<Self> {
        Ok(PyLaw {
            inner: catalog(name, n).map_err(err)?,
            label: name.to_string(),
            n,
        })
    }

    /// Parse a law from its text form, `d` components separated by `;`.
    #[staticmethod]
    fn parse(text: &str, n: usize, d: usize) -> PyResult<Self> {
        Ok(PyLaw {
            inner: parse_law(text, n, d).map_err(err)?,
            label: text.to_string(),
            n,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.n
    }

    fn out_dim(&self) -> usize {
        self.inner.out_dim()
    }

    /// Evaluate the law at a jet.
    fn evaluate(&self, g: &PyJet) -> PyResult<Vec<f64>> {
        let ev = evaluate(&self.inner, &g.inner).map_err(err)?;
        Ok(ev.value.clone())
    }

    /// Evaluate and also return the gradient of each component with respect
    /// to the packed jet coordinates.
    fn evaluate_with_gradient(&self, g: &PyJet) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
        let ev = evaluate(&self.inner, &g.inner).map_err(err)?;
        let grads = (0..ev.out_dim()).map(|a| ev.gradient(a).to_vec()).collect();
        Ok((ev.value.clone(), grads))
    }

    fn __repr__(&self) -> String {
        format!("Law(n={}, \"{}\")", self.n, print_law(&self.inner))
    }

    fn __str__(&self) -> String {
        self.label.clone()
    }
}

/// The solution spaces of the linear system at one body point.
#[pyclass(name = "PointSolution")]
struct PyPointSolution {
    #[pyo3(get)]
    dim_nonholonomic: usize,
    #[pyo3(get)]
    dim_holonomic: usize,
    #[pyo3(get)]
    base_dim_nonholonomic: usize,
    #[pyo3(get)]
    base_dim_holonomic: usize,
    #[pyo3(get)]
    sample_count: usize,
    #[pyo3(get)]
    rank_saturated: bool,
}

#[pyfunction]
#[pyo3(signature = (law, x, seed = 0))]
fn solve_point_dims(law: &PyLaw, x: Vec<f64>, seed: u64) -> PyResult<PyPointSolution> {
    let cfg = SolverConfig {
        seed,
        ..SolverConfig::default()
    };
    let s = solve_point(&law.inner, &DVector::from_vec(x), &cfg).map_err(err)?;
    Ok(PyPointSolution {
        dim_nonholonomic: s.null_nh.dim(),
        dim_holonomic: s.null_h.dim(),
        base_dim_nonholonomic: s.base_nh.dim(),
        base_dim_holonomic: s.base_h.dim(),
        sample_count: s.sample_count,
        rank_saturated: s.rank_saturated,
    })
}

/// Summary of a whole-grid classification run. The per-point dimensions are
/// those of the fibre through the body point, not of the whole kernel.
#[pyclass(name = "GridSummary")]
struct PyGridSummary {
    #[pyo3(get)]
    classification: String,
    #[pyo3(get)]
    dims_nonholonomic: Vec<usize>,
    #[pyo3(get)]
    dims_holonomic: Vec<usize>,
    #[pyo3(get)]
    second_grade_equal: Vec<bool>,
    #[pyo3(get)]
    warnings: Vec<String>,
}

#[pyfunction]
#[pyo3(signature = (law, lo, hi, counts, seed = 0, threads = 1))]
fn classify_grid(
    law: &PyLaw,
    lo: Vec<f64>,
    hi: Vec<f64>,
    counts: Vec<usize>,
    seed: u64,
    threads: usize,
) -> PyResult<PyGridSummary> {
    let grid =
        BodyGrid::new(DVector::from_vec(lo), DVector::from_vec(hi), counts).map_err(err)?;
    let cfg = FieldConfig {
        solver: SolverConfig {
            seed,
            ..SolverConfig::default()
        },
        threads: threads.max(1),
        ..FieldConfig::default()
    };
    let report = analyze_grid(&law.inner, &grid, &cfg).map_err(err)?;
    Ok(PyGridSummary {
        classification: report.classification.as_str().to_string(),
        dims_nonholonomic: report.dims_nh,
        dims_holonomic: report.dims_h,
        second_grade_equal: report.second_grade_equal,
        warnings: report.warnings,
    })
}

#[pyfunction]
#[pyo3(signature = (law, g, probes = 32, seed = 0, tol = 1e-8))]
fn check_isomorphism(
    law: &PyLaw,
    g: &PyJet,
    probes: usize,
    seed: u64,
    tol: f64,
) -> PyResult<(bool, f64)> {
    is_material_isomorphism(&law.inner, &g.inner, probes, seed, tol).map_err(err)
}

#[pyfunction]
fn catalog_names() -> Vec<&'static str> {
    CATALOG_NAMES.to_vec()
}

#[pymodule]
fn matdist_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyJet>()?;
    m.add_class::<PyLaw>()?;
    m.add_class::<PyPointSolution>()?;
    m.add_class::<PyGridSummary>()?;
    m.add_function(wrap_pyfunction!(catalog_names, m)?)?;
    m.add_function(wrap_pyfunction!(solve_point_dims, m)?)?;
    m.add_function(wrap_pyfunction!(classify_grid, m)?)?;
    m.add_function(wrap_pyfunction!(check_isomorphism, m)?)?;
    Ok(())
}
