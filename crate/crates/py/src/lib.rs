//! Python bindings. Rationals cross the boundary as "num/den" strings and
//! artifacts as the same JSON the CLI writes.

use maxmin_core::cds::{self, CdsInstance, DEFAULT_STABBER_CAP};
use maxmin_core::cnf::{self, Cnf3};
use maxmin_core::geom::{format_rational, parse_rational, Point};
use maxmin_core::harness;
use maxmin_core::reduction::{self, GadgetCertificate, GapPoly, PointInstance};
use maxmin_core::render::{self, RenderSpec};
use maxmin_core::triangulation::{self, PointSet, DEFAULT_POINT_CAP};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

#[pyclass(name = "Formula", from_py_object)]
#[derive(Clone)]
struct PyFormula {
    inner: Cnf3,
    hints: cnf::LayoutHints,
}

#[pymethods]
impl PyFormula {
    /// Parses DIMACS text, including layout hint comments.
    #[staticmethod]
    fn from_dimacs(text: &str) -> PyResult<Self> {
        let (inner, hints) = cnf::parse_dimacs(text).map_err(err)?;
        Ok(Self { inner, hints })
    }

    #[staticmethod]
    fn figure() -> Self {
        Self { inner: cnf::figure_formula(), hints: Default::default() }
    }

    #[getter]
    fn num_vars(&self) -> usize {
        self.inner.num_vars
    }

    /// Clauses as lists of signed 1-based literals.
    #[getter]
    fn clauses(&self) -> Vec<Vec<i64>> {
        self.inner.clauses.iter().map(|c| c.iter().map(|l| l.to_dimacs()).collect()).collect()
    }

    fn eval(&self, assignment: Vec<bool>) -> PyResult<bool> {
        if assignment.len() != self.inner.num_vars {
            return Err(err("assignment length differs from the variable count"));
        }
        Ok(self.inner.eval(&assignment))
    }

    fn to_dimacs(&self) -> String {
        self.inner.to_dimacs((!self.hints.is_empty()).then_some(&self.hints))
    }

    fn sat_bruteforce(&self) -> PyResult<Option<Vec<bool>>> {
        harness::sat_bruteforce(&self.inner).map_err(err)
    }

    /// Compiles into a covering instance and its certificate.
    fn compile(&self) -> PyResult<(PyCds, PyCertificate)> {
        let hints = (!self.hints.is_empty()).then_some(&self.hints);
        let (inst, cert) = reduction::compile_3sat_to_cds(&self.inner, hints).map_err(err)?;
        Ok((PyCds { inner: inst }, PyCertificate { inner: cert }))
    }

    /// SAT, covering and (when small enough) triangulation feasibility, as JSON.
    fn check(&self, id: &str) -> PyResult<String> {
        let r = harness::end_to_end_check(id, &self.inner).map_err(err)?;
        serde_json::to_string(&r).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Formula(num_vars={}, clauses={:?})", self.inner.num_vars, self.clauses())
    }
}

#[pyclass(name = "Certificate", from_py_object)]
#[derive(Clone)]
struct PyCertificate {
    inner: GadgetCertificate,
}

#[pymethods]
impl PyCertificate {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: serde_json::from_str(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    /// Covering solution for a truth assignment.
    fn encode(&self, assignment: Vec<bool>) -> PyResult<Vec<usize>> {
        let sol = reduction::encode_assignment(&self.inner, &assignment).map_err(err)?;
        Ok(sol.chosen.into_iter().collect())
    }

    /// Truth assignment read off a cover.
    fn decode(&self, chosen: Vec<usize>) -> PyResult<Vec<bool>> {
        reduction::decode_solution(&self.inner, &cds::CdsSolution::new(chosen)).map_err(err)
    }
}

#[pyclass(name = "CdsInstance", from_py_object)]
#[derive(Clone)]
struct PyCds {
    inner: CdsInstance,
}

#[pymethods]
impl PyCds {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: serde_json::from_str(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    #[getter]
    fn num_stabbers(&self) -> usize {
        self.inner.stabbers().len()
    }

    #[getter]
    fn num_targets(&self) -> usize {
        self.inner.targets().len()
    }

    fn covering(&self, target: usize) -> PyResult<Vec<usize>> {
        if target >= self.inner.targets().len() {
            return Err(err("target index out of range"));
        }
        Ok(self.inner.covering(target).to_vec())
    }

    fn verify(&self, chosen: Vec<usize>) -> bool {
        cds::verify_solution(&self.inner, &cds::CdsSolution::new(chosen))
    }

    /// Exhaustive search; `None` when no cover exists.
    #[pyo3(signature = (cap = DEFAULT_STABBER_CAP))]
    fn solve_bruteforce(&self, cap: usize) -> PyResult<Option<Vec<usize>>> {
        let sol = cds::solve_bruteforce(&self.inner, cap).map_err(err)?;
        Ok(sol.map(|s| s.chosen.into_iter().collect()))
    }

    fn solve_structured(&self, cert: &PyCertificate) -> PyResult<Option<Vec<usize>>> {
        let sol = cds::solve_structured(&self.inner, &cert.inner).map_err(err)?;
        Ok(sol.map(|s| s.chosen.into_iter().collect()))
    }

    /// Builds the point instance; `gap` is a polynomial such as "n^2".
    #[pyo3(signature = (gap = None, seed = 0))]
    fn to_points(&self, gap: Option<&str>, seed: u64) -> PyResult<PyPoints> {
        let gap: Option<GapPoly> = gap.map(str::parse).transpose().map_err(err)?;
        let (_, pi) = reduction::build_point_instance_seeded(&self.inner, gap.as_ref(), seed).map_err(err)?;
        Ok(PyPoints { inner: pi })
    }

    #[pyo3(signature = (cert = None, width = 800, height = 600))]
    fn render_svg(&self, cert: Option<&PyCertificate>, width: u32, height: u32) -> PyResult<String> {
        let spec = RenderSpec { width, height, ..RenderSpec::default() };
        render::render_cds(&self.inner, cert.map(|c| &c.inner), &spec).map_err(err)
    }
}

#[pyclass(name = "PointInstance", from_py_object)]
#[derive(Clone)]
struct PyPoints {
    inner: PointInstance,
}

#[pymethods]
impl PyPoints {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self { inner: serde_json::from_str(text).map_err(err)? })
    }

    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn points(&self) -> Vec<(String, String)> {
        self.inner.points.points().iter().map(|p| (format_rational(&p.x), format_rational(&p.y))).collect()
    }

    #[getter]
    fn epsilon_sq(&self) -> String {
        format_rational(&self.inner.epsilon_sq)
    }

    #[getter]
    fn delta_sq(&self) -> String {
        format_rational(&self.inner.delta_sq)
    }

    #[getter]
    fn num_pairs(&self) -> usize {
        self.inner.pairs.len()
    }

    fn invariant_violations(&self) -> Vec<String> {
        self.inner.invariant_violations()
    }

    /// Segments between instance points that separate an ε-pair without
    /// being a covering stabber, as (pair, p, q, along_covering_stabber).
    fn soundness_audit(&self) -> Vec<(usize, usize, usize, bool)> {
        reduction::separation_soundness_audit(&self.inner)
            .into_iter()
            .map(|v| (v.pair, v.p, v.q, v.along_covering_stabber))
            .collect()
    }

    #[pyo3(signature = (width = 800, height = 600))]
    fn render_svg(&self, width: u32, height: u32) -> PyResult<String> {
        let spec = RenderSpec { width, height, ..RenderSpec::default() };
        render::render_points(&self.inner, None, &spec).map_err(err)
    }
}

fn point_set(points: Vec<(String, String)>) -> PyResult<PointSet> {
    let pts = points
        .into_iter()
        .map(|(x, y)| Ok(Point::new(parse_rational(&x).map_err(err)?, parse_rational(&y).map_err(err)?)))
        .collect::<PyResult<Vec<_>>>()?;
    PointSet::new(pts).map_err(err)
}

/// MaxMin-length triangulation of points given as rational strings.
/// Returns the squared optimum and the witness edges.
#[pyfunction]
#[pyo3(signature = (points, cap = DEFAULT_POINT_CAP))]
fn maxmin_triangulation(points: Vec<(String, String)>, cap: usize) -> PyResult<(String, Vec<(usize, usize)>)> {
    let ps = point_set(points)?;
    let r = triangulation::maxmin_triangulation(&ps, cap).map_err(err)?;
    Ok((format_rational(&r.optimum_sq), r.witness.edges.iter().map(|e| (e.i, e.j)).collect()))
}

/// Number of triangulations, stopping with an error past `limit`.
#[pyfunction]
#[pyo3(signature = (points, limit = 1_000_000, cap = DEFAULT_POINT_CAP))]
fn count_triangulations(points: Vec<(String, String)>, limit: usize, cap: usize) -> PyResult<usize> {
    let ps = point_set(points)?;
    Ok(triangulation::enumerate_triangulations(&ps, limit, cap).map_err(err)?.len())
}

/// End-to-end reports for seeds `0..count`, as JSON strings.
#[pyfunction]
fn check_seeds(count: u64) -> PyResult<Vec<String>> {
    harness::check_seeds(count)
        .into_iter()
        .map(|r| r.map_err(err).and_then(|r| serde_json::to_string(&r).map_err(err)))
        .collect()
}

#[pymodule]
fn maxmin_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFormula>()?;
    m.add_class::<PyCertificate>()?;
    m.add_class::<PyCds>()?;
    m.add_class::<PyPoints>()?;
    m.add_function(wrap_pyfunction!(maxmin_triangulation, m)?)?;
    m.add_function(wrap_pyfunction!(count_triangulations, m)?)?;
    m.add_function(wrap_pyfunction!(check_seeds, m)?)?;
    Ok(())
}
