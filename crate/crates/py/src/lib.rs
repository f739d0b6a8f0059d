//! Python bindings: the main types and operations of the analysis toolkit
//! exposed as the `mixedmf_py` extension module.
//!
//! The surface mirrors the library: build a cascade or ingest samples, query
//! masses and diagnostics, solve partition exponents, evaluate the exact
//! cascade solver, estimate spectra, and run the property-check suite.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use mixedmf::config::RunConfig;
use mixedmf::measure;
use mixedmf::oracle;
use mixedmf::partition::{self, QVector};
use mixedmf::spectrum;
use mixedmf::verify;

fn err(e: mixedmf::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Exactly solvable cascade description: weight vectors per measure, gauge
/// last.
#[pyclass(name = "CascadeSpec", from_py_object)]
#[derive(Clone)]
struct PyCascadeSpec {
    inner: measure::CascadeSpec,
}

#[pymethods]
impl PyCascadeSpec {
    #[new]
    #[pyo3(signature = (base, dimension, levels, weights, degenerate = false))]
    fn new(
        base: u32,
        dimension: u32,
        levels: usize,
        weights: Vec<Vec<f64>>,
        degenerate: bool,
    ) -> PyResult<Self> {
        let inner = if degenerate {
            measure::CascadeSpec::new_degenerate(base, dimension, levels, weights)
        } else {
            measure::CascadeSpec::new(base, dimension, levels, weights)
        }
        .map_err(err)?;
        Ok(PyCascadeSpec { inner })
    }

    #[getter]
    fn measure_count(&self) -> usize {
        self.inner.measure_count()
    }

    #[getter]
    fn levels(&self) -> usize {
        self.inner.levels
    }

    /// Root of the transfer equation `phi(q, t) = 1`.
    fn solve_exponent(&self, q: Vec<f64>) -> PyResult<f64> {
        oracle::solve_exponent(&self.inner, &QVector::new(q)).map_err(err)
    }

    /// Transfer sum `phi(q, t)`.
    fn phi(&self, q: Vec<f64>, t: f64) -> PyResult<f64> {
        oracle::phi(&self.inner, &QVector::new(q), t).map_err(err)
    }

    /// Gradient of the exponent by implicit differentiation.
    fn exponent_gradient(&self, q: Vec<f64>) -> PyResult<Vec<f64>> {
        oracle::exponent_gradient(&self.inner, &QVector::new(q)).map_err(err)
    }

    /// `(gamma, value)` spectrum point reached at `q`.
    fn oracle_spectrum(&self, q: Vec<f64>) -> PyResult<(Vec<f64>, f64)> {
        oracle::oracle_spectrum(&self.inner, &QVector::new(q)).map_err(err)
    }

    /// Per-measure `(gamma_min, gamma_max)` reachable spectrum range.
    fn spectral_bounds(&self) -> PyResult<(Vec<f64>, Vec<f64>)> {
        oracle::spectral_bounds(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "CascadeSpec(base={}, dimension={}, levels={}, k={})",
            self.inner.base,
            self.inner.dimension,
            self.inner.levels,
            self.inner.measure_count()
        )
    }
}

/// One measure's mass assignment on the grid.
#[pyclass(name = "MeasureTree", from_py_object)]
#[derive(Clone)]
struct PyMeasureTree {
    inner: measure::MeasureTree,
}

#[pymethods]
impl PyMeasureTree {
    #[getter]
    fn max_level(&self) -> usize {
        self.inner.max_level()
    }

    /// Mass of the box addressed by an interleaved digit path.
    fn mass(&self, path: Vec<u8>) -> PyResult<f64> {
        self.inner.mass_of_path(&path).map_err(err)
    }

    /// Number of positive-mass boxes at a level.
    fn support_size(&self, level: usize) -> usize {
        self.inner.support_size(level)
    }

    /// `(alpha, [(level, per-level minimum)])` regularity diagnostics.
    fn ahlfors_index(&self, lo: usize, hi: usize) -> PyResult<(f64, Vec<(usize, f64)>)> {
        let trace = measure::ahlfors_index(&self.inner, (lo, hi)).map_err(err)?;
        Ok((trace.alpha, trace.per_level))
    }

    /// Worst parent-neighborhood mass ratio at one level.
    fn doubling_ratio(&self, a: f64, level: usize) -> PyResult<f64> {
        measure::doubling_ratio(&self.inner, a, level).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "MeasureTree(base={}, dimension={}, max_level={})",
            self.inner.base(),
            self.inner.dimension(),
            self.inner.max_level()
        )
    }
}

/// The analyzed measures plus their gauge on one grid.
#[pyclass(name = "VectorMeasure")]
struct PyVectorMeasure {
    inner: measure::VectorMeasure,
}

#[pymethods]
impl PyVectorMeasure {
    #[new]
    fn new(analyzed: Vec<PyMeasureTree>, gauge: PyMeasureTree) -> PyResult<Self> {
        let inner = measure::VectorMeasure::new(
            analyzed.into_iter().map(|t| t.inner).collect(),
            gauge.inner,
        )
        .map_err(err)?;
        Ok(PyVectorMeasure { inner })
    }

    #[getter]
    fn measure_count(&self) -> usize {
        self.inner.measure_count()
    }

    #[getter]
    fn max_level(&self) -> usize {
        self.inner.max_level()
    }

    fn analyzed(&self, j: usize) -> PyResult<PyMeasureTree> {
        if j >= self.inner.measure_count() {
            return Err(PyValueError::new_err(format!("no analyzed measure {j}")));
        }
        Ok(PyMeasureTree {
            inner: self.inner.analyzed(j).clone(),
        })
    }

    fn gauge(&self) -> PyMeasureTree {
        PyMeasureTree {
            inner: self.inner.gauge().clone(),
        }
    }

    /// `ln` of the joint partition sum at `(q, t)` over one level.
    fn log_partition_sum(&self, q: Vec<f64>, t: f64, level: usize) -> PyResult<f64> {
        partition::log_partition_sum(&self.inner, &QVector::new(q), t, level).map_err(err)
    }

    /// The critical exponent `t*` at one level.
    fn solve_t_star(&self, q: Vec<f64>, level: usize) -> PyResult<f64> {
        partition::solve_t_star(&self.inner, &QVector::new(q), level).map_err(err)
    }

    /// Dimension estimates over a level window: a dict with the per-level
    /// roots and the three fitted values.
    fn estimate_dimensions(
        &self,
        py: Python<'_>,
        q: Vec<f64>,
        lo: usize,
        hi: usize,
    ) -> PyResult<Py<pyo3::types::PyDict>> {
        let est = partition::estimate_dimensions(&self.inner, &QVector::new(q), (lo, hi))
            .map_err(err)?;
        let dict = pyo3::types::PyDict::new(py);
        dict.set_item("q", est.q.as_slice().to_vec())?;
        dict.set_item("roots", est.roots)?;
        dict.set_item("b_hat", est.lower)?;
        dict.set_item("B_hat", est.packing)?;
        dict.set_item("Lambda_hat", est.upper)?;
        dict.set_item("residual", est.residual)?;
        dict.set_item("window", est.window)?;
        Ok(dict.unbind())
    }

    /// Canonical spectrum point `(gamma, value)` at one level.
    fn canonical_spectrum(&self, q: Vec<f64>, level: usize) -> PyResult<(Vec<f64>, f64)> {
        spectrum::canonical_spectrum(&self.inner, &QVector::new(q), level).map_err(err)
    }

    /// Histogram spectrum samples `[(gamma, value)]` at one level.
    fn histogram_spectrum(&self, level: usize, delta: f64) -> PyResult<Vec<(Vec<f64>, f64)>> {
        let curve = spectrum::histogram_spectrum(&self.inner, level, delta).map_err(err)?;
        Ok(curve.samples)
    }

    /// Per-level local dimension ratios along a digit path.
    fn local_dimension(
        &self,
        path: Vec<u8>,
        lo: usize,
        hi: usize,
    ) -> PyResult<Vec<(usize, Vec<f64>)>> {
        let ld = spectrum::local_dimension(&self.inner, &path, (lo, hi)).map_err(err)?;
        Ok(ld.per_level)
    }

    /// Number of boxes whose local dimension vector lies within `delta` of
    /// `gamma`, plus the family's gauge dimension (None when empty).
    fn classify_boxes(
        &self,
        gamma: Vec<f64>,
        delta: f64,
        level: usize,
    ) -> PyResult<(usize, Option<f64>)> {
        let boxes = spectrum::classify_boxes(&self.inner, &gamma, delta, level).map_err(err)?;
        if boxes.is_empty() {
            return Ok((0, None));
        }
        let dim = spectrum::relative_dimension(&self.inner, &boxes).map_err(err)?;
        Ok((boxes.len(), Some(dim)))
    }

    fn __repr__(&self) -> String {
        format!(
            "VectorMeasure(k={}, max_level={})",
            self.inner.measure_count(),
            self.inner.max_level()
        )
    }
}

/// Builds the cascade's trees from a spec.
#[pyfunction]
fn build_cascade(spec: &PyCascadeSpec) -> PyResult<PyVectorMeasure> {
    Ok(PyVectorMeasure {
        inner: measure::build_cascade(&spec.inner).map_err(err)?,
    })
}

/// Empirical measure of a point set on the grid.
#[pyfunction]
fn ingest_samples(
    points: Vec<Vec<f64>>,
    base: u32,
    dimension: u32,
    max_level: usize,
) -> PyResult<PyMeasureTree> {
    Ok(PyMeasureTree {
        inner: measure::ingest_samples(&points, base, dimension, max_level).map_err(err)?,
    })
}

/// Legendre transform of a sampled table `[(q, value)]` at `gamma`.
#[pyfunction]
fn legendre(table: Vec<(Vec<f64>, f64)>, gamma: Vec<f64>) -> PyResult<(f64, Vec<f64>)> {
    let table = spectrum::QTable::new(
        table
            .into_iter()
            .map(|(q, v)| (QVector::new(q), v))
            .collect(),
    );
    let (value, argmin) = spectrum::legendre(&table, &gamma).map_err(err)?;
    Ok((value, argmin.as_slice().to_vec()))
}

/// Runs the default property-check suite; returns one dict per check.
#[pyfunction]
#[pyo3(signature = (seed = 17))]
fn run_verify(py: Python<'_>, seed: u64) -> PyResult<Py<pyo3::types::PyDict>> {
    let mut cfg = verify::VerifyConfig::default();
    cfg.seed = seed;
    let report = verify::run_suite(&cfg).map_err(err)?;
    let out = pyo3::types::PyList::empty(py);
    for c in &report.checks {
        let d = pyo3::types::PyDict::new(py);
        d.set_item("id", &c.id)?;
        d.set_item("statement", &c.statement)?;
        d.set_item(
            "status",
            match c.status {
                verify::CheckStatus::Pass => "pass",
                verify::CheckStatus::Fail => "fail",
                verify::CheckStatus::Unverified => "unverified",
            },
        )?;
        d.set_item("margin", c.margin)?;
        d.set_item("notes", &c.notes)?;
        out.append(d)?;
    }
    let result = pyo3::types::PyDict::new(py);
    result.set_item("passed", report.passed)?;
    result.set_item("seed", report.seed)?;
    result.set_item("checks", out)?;
    Ok(result.unbind())
}

/// Parses a run config TOML document (schema documented in the README).
#[pyfunction]
fn parse_config(text: &str) -> PyResult<String> {
    let cfg = RunConfig::from_toml(text).map_err(err)?;
    Ok(cfg.to_toml())
}

#[pymodule]
fn mixedmf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCascadeSpec>()?;
    m.add_class::<PyMeasureTree>()?;
    m.add_class::<PyVectorMeasure>()?;
    m.add_function(wrap_pyfunction!(build_cascade, m)?)?;
    m.add_function(wrap_pyfunction!(ingest_samples, m)?)?;
    m.add_function(wrap_pyfunction!(legendre, m)?)?;
    m.add_function(wrap_pyfunction!(run_verify, m)?)?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    Ok(())
}
