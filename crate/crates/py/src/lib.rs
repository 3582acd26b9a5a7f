//! Python bindings. Points cross the boundary as plain Python values:
//! a list of floats (euclidean, sphere), a 3x3 nested list (spd, so3) or a
//! `(word, lambda)` tuple (tree, with `("e", 0.0)` the root).

use std::collections::HashMap;
use std::path::PathBuf;

use geogossip::engine::Configuration;
use geogossip::experiment::{run_experiment as run, ExperimentConfig};
use geogossip::network::Graph as CoreGraph;
use geogossip::spaces::{Mat3, Rotation, SpdMatrix, SphereVec, TreePoint, Word};
use geogossip::suite::{run_property_suite, SuiteSelector};
use geogossip::{stats, GossipError, SpaceKind, SpacePoint};
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBool;

fn err(e: GossipError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_space(name: &str) -> PyResult<SpaceKind> {
    name.parse().map_err(err)
}

fn matrix(rows: Vec<Vec<f64>>) -> PyResult<Mat3> {
    if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
        return Err(PyValueError::new_err("expected a 3x3 nested list"));
    }
    Ok(Mat3::from_rows([
        [rows[0][0], rows[0][1], rows[0][2]],
        [rows[1][0], rows[1][1], rows[1][2]],
        [rows[2][0], rows[2][1], rows[2][2]],
    ]))
}

fn rows(m: &Mat3) -> Vec<Vec<f64>> {
    m.0.iter().map(|r| r.to_vec()).collect()
}

fn to_point(kind: SpaceKind, obj: &Bound<'_, PyAny>) -> PyResult<SpacePoint> {
    Ok(match kind {
        SpaceKind::Euclidean => SpacePoint::Euclidean(obj.extract()?),
        SpaceKind::Spd => SpacePoint::Spd(SpdMatrix::new(matrix(obj.extract()?)?).map_err(err)?),
        SpaceKind::So3 => SpacePoint::Rotation(Rotation::new(matrix(obj.extract()?)?).map_err(err)?),
        SpaceKind::Sphere => {
            let v: [f64; 3] = obj.extract()?;
            SpacePoint::Sphere(SphereVec::new(v).map_err(err)?)
        }
        SpaceKind::Tree => {
            let (word, lambda): (String, f64) = obj.extract()?;
            let word = Word::parse(&word).map_err(err)?;
            let p = if word.is_empty() && lambda == 0.0 { TreePoint::root() } else { TreePoint::new(word, lambda).map_err(err)? };
            SpacePoint::Tree(p)
        }
    })
}

fn from_point(py: Python<'_>, p: &SpacePoint) -> PyResult<Py<PyAny>> {
    let obj = match p {
        SpacePoint::Euclidean(v) => v.clone().into_pyobject(py)?.into_any(),
        SpacePoint::Spd(m) => rows(m.matrix()).into_pyobject(py)?.into_any(),
        SpacePoint::Rotation(r) => rows(r.matrix()).into_pyobject(py)?.into_any(),
        SpacePoint::Sphere(v) => v.coords().to_vec().into_pyobject(py)?.into_any(),
        SpacePoint::Tree(t) => (t.word().to_string(), t.lambda()).into_pyobject(py)?.into_any(),
    };
    Ok(obj.unbind())
}

fn configuration(kind: SpaceKind, points: &Bound<'_, PyAny>) -> PyResult<Configuration> {
    let items: Vec<Bound<'_, PyAny>> = points.extract()?;
    let pts = items.iter().map(|o| to_point(kind, o)).collect::<PyResult<Vec<_>>>()?;
    Configuration::new(kind, pts).map_err(err)
}

/// Geodesic distance between two points of `space`.
#[pyfunction]
fn distance(space: &str, p: &Bound<'_, PyAny>, q: &Bound<'_, PyAny>) -> PyResult<f64> {
    let kind = parse_space(space)?;
    geogossip::distance(kind, &to_point(kind, p)?, &to_point(kind, q)?).map_err(err)
}

/// Point at fraction `t` of the geodesic from `p` to `q`.
#[pyfunction]
fn geodesic(py: Python<'_>, space: &str, p: &Bound<'_, PyAny>, q: &Bound<'_, PyAny>, t: f64) -> PyResult<Py<PyAny>> {
    let kind = parse_space(space)?;
    let g = geogossip::geodesic_point(kind, &to_point(kind, p)?, &to_point(kind, q)?, t).map_err(err)?;
    from_point(py, &g)
}

#[pyfunction]
fn midpoint(py: Python<'_>, space: &str, p: &Bound<'_, PyAny>, q: &Bound<'_, PyAny>) -> PyResult<Py<PyAny>> {
    let kind = parse_space(space)?;
    let m = geogossip::midpoint(kind, &to_point(kind, p)?, &to_point(kind, q)?).map_err(err)?;
    from_point(py, &m)
}

#[pyfunction]
fn chi_kappa(kappa: f64, t: f64) -> PyResult<f64> {
    geogossip::model::chi_kappa(kappa, t).map_err(err)
}

#[pyclass(frozen)]
struct Graph(CoreGraph);

#[pymethods]
impl Graph {
    #[staticmethod]
    fn complete(n: usize) -> PyResult<Self> {
        CoreGraph::complete(n).map(Graph).map_err(err)
    }

    #[staticmethod]
    fn path(n: usize) -> PyResult<Self> {
        CoreGraph::path(n).map(Graph).map_err(err)
    }

    #[staticmethod]
    fn from_edges(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        CoreGraph::from_edges(n, &edges).map(Graph).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    #[getter]
    fn degrees(&self) -> Vec<usize> {
        self.0.degrees().to_vec()
    }

    #[getter]
    fn diameter(&self) -> usize {
        self.0.diameter()
    }

    #[getter]
    fn max_degree(&self) -> usize {
        self.0.max_degree()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().collect()
    }

    fn edge_probability(&self, v: usize, w: usize) -> f64 {
        self.0.edge_probability(v, w)
    }

    fn c_g_constant(&self) -> f64 {
        self.0.c_g_constant()
    }

    fn __repr__(&self) -> String {
        format!("Graph(n={}, edges={}, diameter={})", self.0.n(), self.0.edge_count(), self.0.diameter())
    }
}

#[pyfunction]
fn variance(space: &str, points: &Bound<'_, PyAny>) -> PyResult<f64> {
    stats::variance(&configuration(parse_space(space)?, points)?).map_err(err)
}

#[pyfunction]
fn disagreement(space: &str, points: &Bound<'_, PyAny>, graph: &Graph) -> PyResult<f64> {
    stats::disagreement(&configuration(parse_space(space)?, points)?, &graph.0).map_err(err)
}

#[pyfunction]
fn variance_kappa(space: &str, points: &Bound<'_, PyAny>, kappa: f64) -> PyResult<f64> {
    stats::variance_kappa(&configuration(parse_space(space)?, points)?, kappa).map_err(err)
}

#[pyfunction]
fn disagreement_kappa(space: &str, points: &Bound<'_, PyAny>, graph: &Graph, kappa: f64) -> PyResult<f64> {
    stats::disagreement_kappa(&configuration(parse_space(space)?, points)?, &graph.0, kappa).map_err(err)
}

/// Exact expected change of the variance over one midpoint step.
#[pyfunction]
fn expected_one_step_change(space: &str, points: &Bound<'_, PyAny>, graph: &Graph) -> PyResult<f64> {
    stats::expected_one_step_change(&configuration(parse_space(space)?, points)?, &graph.0).map_err(err)
}

/// Runs an experiment; keys of `config` are the CLI flag names. Returns the
/// summary as a dict and optionally writes the CSV and JSON files.
#[pyfunction]
#[pyo3(signature = (config=None, csv=None, summary=None))]
fn run_experiment(
    py: Python<'_>,
    config: Option<HashMap<String, Bound<'_, PyAny>>>,
    csv: Option<PathBuf>,
    summary: Option<PathBuf>,
) -> PyResult<Py<PyAny>> {
    let mut cfg = ExperimentConfig::default();
    for (key, value) in config.unwrap_or_default() {
        let text = if value.is_none() {
            "auto".to_string()
        } else if value.is_instance_of::<PyBool>() {
            value.extract::<bool>()?.to_string()
        } else {
            value.str()?.to_string()
        };
        cfg.set(&key, &text).map_err(err)?;
    }
    let out = py.detach(|| run(&cfg)).map_err(err)?;
    let mut text = Vec::new();
    geogossip::experiment::write_summary(&out.summary, &mut text).map_err(|e| PyIOError::new_err(e.to_string()))?;
    if let Some(path) = csv {
        let mut f = std::fs::File::create(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        geogossip::experiment::write_csv(&out.series, &mut f).map_err(|e| PyIOError::new_err(e.to_string()))?;
    }
    if let Some(path) = summary {
        std::fs::write(path, &text).map_err(|e| PyIOError::new_err(e.to_string()))?;
    }
    let json = py.import("json")?;
    Ok(json.call_method1("loads", (String::from_utf8_lossy(&text).into_owned(),))?.unbind())
}

/// Runs the property suite; returns `(passed, report)`.
#[pyfunction]
#[pyo3(signature = (selector="all", seed=0))]
fn check(selector: &str, seed: u64) -> PyResult<(bool, String)> {
    let selector: SuiteSelector = selector.parse().map_err(err)?;
    let report = run_property_suite(selector, seed).map_err(err)?;
    Ok((report.passed(), report.to_string()))
}

#[pymodule]
fn pygeogossip(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(distance, m)?)?;
    m.add_function(wrap_pyfunction!(geodesic, m)?)?;
    m.add_function(wrap_pyfunction!(midpoint, m)?)?;
    m.add_function(wrap_pyfunction!(chi_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(variance, m)?)?;
    m.add_function(wrap_pyfunction!(disagreement, m)?)?;
    m.add_function(wrap_pyfunction!(variance_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(disagreement_kappa, m)?)?;
    m.add_function(wrap_pyfunction!(expected_one_step_change, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_class::<Graph>()?;
    Ok(())
}
