use std::fmt::Display;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use qpq::analysis::{
    classical_decoy_bound as decoy_bound, info_bound as info_bound_of, repeated_query_exact, sweep, verify_theorem,
    write_csv, RepeatedQuery,
};
use qpq::protocol::{run_session_exact, run_session_with_rng, Database, QuerySpec, Scenario, SessionOptions};
use qpq::qcore::{Complex, DensityMatrix};
use qpq::strategies::{
    by_name, multi_answer_database, multi_answer_nonrhetoric_database, random_near_honest, validate_scope,
    BobStrategy, RandomStrategyConfig,
};
use qpq::variants::{averaged_pass_probability, sample_variant_parameters, VariantConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

fn err(e: impl Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let text = serde_json::to_string(value).map_err(err)?;
    Ok(py.import("json")?.call_method1("loads", (text,))?.unbind())
}

fn rows(rho: &DensityMatrix) -> Vec<Vec<Complex>> {
    let m = rho.matrix();
    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)]).collect()).collect()
}

fn scenario(tag: &str) -> PyResult<Scenario> {
    match tag {
        "a" | "A" => Ok(Scenario::A),
        "b" | "B" => Ok(Scenario::B),
        other => Err(err(format!("scenario must be 'a' or 'b', got `{other}`"))),
    }
}

/// Accepts a short variant name or a JSON variant description.
fn variant(spec: &str, theta_grid: Option<usize>) -> PyResult<VariantConfig> {
    if spec.trim_start().starts_with('{') {
        let v: VariantConfig = serde_json::from_str(spec).map_err(err)?;
        Ok(v)
    } else {
        VariantConfig::from_name(spec, theta_grid).map_err(err)
    }
}

fn options(unconstrained: bool) -> SessionOptions {
    SessionOptions {
        unconstrained,
        ..Default::default()
    }
}

/// Database of `2^n` entries with answers in `0..d_r`.
#[pyclass(name = "Database", frozen)]
struct PyDatabase {
    inner: Database,
}

#[pymethods]
impl PyDatabase {
    /// Standard table when `answers` is omitted.
    #[new]
    #[pyo3(signature = (n, d_r, answers=None))]
    fn new(n: u32, d_r: usize, answers: Option<Vec<usize>>) -> PyResult<Self> {
        let inner = match answers {
            Some(a) => Database::unique(n, d_r, &a),
            None => Database::standard(n, d_r),
        }
        .map_err(err)?;
        Ok(Self { inner })
    }

    /// Table used by the rhetoric multi-answer attack.
    #[staticmethod]
    fn multi_answer(d_r: usize) -> PyResult<Self> {
        Ok(Self {
            inner: multi_answer_database(d_r).map_err(err)?,
        })
    }

    /// Table used by the three-message multi-answer attack.
    #[staticmethod]
    fn multi_answer_nonrhetoric(d_r: usize) -> PyResult<Self> {
        Ok(Self {
            inner: multi_answer_nonrhetoric_database(d_r).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n()
    }

    #[getter]
    fn d_r(&self) -> usize {
        self.inner.answer_dim()
    }

    #[getter]
    fn entries(&self) -> usize {
        self.inner.entries()
    }

    fn answers(&self, j: usize) -> PyResult<Vec<usize>> {
        if j >= self.inner.entries() {
            return Err(err(format!("index {j} out of range")));
        }
        Ok(self.inner.answers(j).to_vec())
    }

    fn __repr__(&self) -> String {
        format!("Database(n={}, d_r={})", self.inner.n(), self.inner.answer_dim())
    }
}

/// Bob's behavior over all rounds.
#[pyclass(name = "Strategy", frozen)]
struct PyStrategy {
    inner: BobStrategy,
}

#[pymethods]
impl PyStrategy {
    /// Catalog strategy by name.
    #[staticmethod]
    #[pyo3(signature = (name, database, rounds=2, param=0.0))]
    fn catalog(name: &str, database: &PyDatabase, rounds: usize, param: f64) -> PyResult<Self> {
        let db = &database.inner;
        Ok(Self {
            inner: by_name(name, db.n(), rounds, param, db).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: BobStrategy::from_json(text).map_err(err)?,
        })
    }

    /// Random two-round strategy close to honest, from `seed`.
    #[staticmethod]
    #[pyo3(signature = (seed, n=2, d_r=4, d_b=2))]
    fn random_near_honest(seed: u64, n: u32, d_r: usize, d_b: usize) -> PyResult<Self> {
        let cfg = RandomStrategyConfig {
            n,
            d_r,
            d_b,
            ..Default::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self {
            inner: random_near_honest(&cfg, &mut rng).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> &str {
        &self.inner.name
    }

    #[getter]
    fn d_b(&self) -> usize {
        self.inner.b_dim
    }

    #[getter]
    fn rounds(&self) -> usize {
        self.inner.num_rounds()
    }

    #[getter]
    fn is_unitary(&self) -> bool {
        self.inner.is_unitary()
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(err)
    }

    /// Scope violations as strings; empty when the strategy is admissible.
    #[pyo3(signature = (unconstrained=false))]
    fn scope_violations(&self, unconstrained: bool) -> Vec<String> {
        let report = validate_scope(&self.inner, self.inner.num_rounds(), unconstrained);
        if report.is_ok() {
            Vec::new()
        } else {
            vec![report.to_string()]
        }
    }

    fn __repr__(&self) -> String {
        format!("Strategy({:?}, d_b={})", self.inner.name, self.inner.b_dim)
    }
}

/// Exact session for the canonical query on `j`.
#[pyfunction]
#[pyo3(signature = (strategy, database, j, scenario_tag="a", unconstrained=false))]
fn exact_session(
    py: Python<'_>,
    strategy: &PyStrategy,
    database: &PyDatabase,
    j: usize,
    scenario_tag: &str,
    unconstrained: bool,
) -> PyResult<Py<PyAny>> {
    let sc = scenario(scenario_tag)?;
    let out = py
        .detach(|| {
            run_session_exact(&QuerySpec::canonical(j), sc, &database.inner, &strategy.inner, &options(unconstrained))
        })
        .map_err(err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("pass_probability", out.pass_probability)?;
    dict.set_item("recovered_answer", out.recovered_answer)?;
    dict.set_item("answer_distribution", out.answer_distribution.clone())?;
    dict.set_item("bob_residual", rows(&out.bob_residual))?;
    dict.set_item("bob_passed", rows(&out.bob_passed))?;
    Ok(dict.into_any().unbind())
}

/// One sampled session; returns the outcome summary and the transcript.
#[pyfunction]
#[pyo3(signature = (strategy, database, j, seed, variant_spec="canonical", theta_grid=None, unconstrained=false))]
#[allow(clippy::too_many_arguments)]
fn run_session(
    py: Python<'_>,
    strategy: &PyStrategy,
    database: &PyDatabase,
    j: usize,
    seed: u64,
    variant_spec: &str,
    theta_grid: Option<usize>,
    unconstrained: bool,
) -> PyResult<Py<PyAny>> {
    let cfg = variant(variant_spec, theta_grid)?;
    let db = &database.inner;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let drawn = sample_variant_parameters(&cfg, j, db.entries(), &mut rng).map_err(err)?;
    let (out, transcript) =
        run_session_with_rng(&drawn.spec, None, db, &strategy.inner, &options(unconstrained), &mut rng, seed)
            .map_err(err)?;
    let dict = pyo3::types::PyDict::new(py);
    dict.set_item("scenario", out.scenario.map(|s| s.tag()))?;
    dict.set_item("passed", out.passed)?;
    dict.set_item("recovered_answer", out.recovered_answer)?;
    dict.set_item("bob_residual", rows(&out.bob_residual))?;
    dict.set_item("query", to_py(py, &drawn.spec)?)?;
    dict.set_item("transcript", to_py(py, &transcript)?)?;
    Ok(dict.into_any().unbind())
}

/// Pass probability averaged over the variant's parameters and both scenarios.
#[pyfunction]
#[pyo3(signature = (strategy, database, j, variant_spec="canonical", theta_grid=None, unconstrained=false))]
fn pass_probability(
    py: Python<'_>,
    strategy: &PyStrategy,
    database: &PyDatabase,
    j: usize,
    variant_spec: &str,
    theta_grid: Option<usize>,
    unconstrained: bool,
) -> PyResult<f64> {
    let cfg = variant(variant_spec, theta_grid)?;
    py.detach(|| averaged_pass_probability(&cfg, j, &database.inner, &strategy.inner, &options(unconstrained)))
        .map_err(err)
}

/// Fidelity theorem report for a two-round strategy.
#[pyfunction]
fn verify(py: Python<'_>, strategy: &PyStrategy, database: &PyDatabase) -> PyResult<Py<PyAny>> {
    let report = py
        .detach(|| verify_theorem(&strategy.inner, &database.inner, &SessionOptions::default()))
        .map_err(err)?;
    to_py(py, &report)
}

/// Holevo information of B and the two information bounds.
#[pyfunction]
fn info_bound(py: Python<'_>, strategy: &PyStrategy, database: &PyDatabase) -> PyResult<Py<PyAny>> {
    let bound = py
        .detach(|| info_bound_of(&strategy.inner, &database.inner, &SessionOptions::default()))
        .map_err(err)?;
    to_py(py, &bound)
}

/// Trade-off sweep of a catalog family; returns CSV text.
#[pyfunction]
#[pyo3(signature = (name, grid, database))]
fn sweep_csv(py: Python<'_>, name: &str, grid: Vec<f64>, database: &PyDatabase) -> PyResult<String> {
    let db = &database.inner;
    let rows = py.detach(|| sweep(|x| by_name(name, db.n(), 2, x, db), &grid, db, &SessionOptions::default()));
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(err)?;
    String::from_utf8(buf).map_err(err)
}

/// Consecutive queries on `j` with Bob's B carried across sessions.
#[pyfunction]
#[pyo3(signature = (strategy, database, j, sessions, measure_b_between=false))]
fn repeated_query(
    py: Python<'_>,
    strategy: &PyStrategy,
    database: &PyDatabase,
    j: usize,
    sessions: usize,
    measure_b_between: bool,
) -> PyResult<Py<PyAny>> {
    let setup = RepeatedQuery::new(j, sessions, measure_b_between);
    let report = py
        .detach(|| repeated_query_exact(&strategy.inner, &database.inner, &setup))
        .map_err(err)?;
    to_py(py, &report)
}

/// Information bound for a classical query hidden among `m` decoys.
#[pyfunction]
fn classical_decoy_bound(n_entries: usize, m: usize) -> PyResult<f64> {
    decoy_bound(n_entries, m).map_err(err)
}

#[pymodule(name = "qpq")]
fn qpq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDatabase>()?;
    m.add_class::<PyStrategy>()?;
    m.add_function(wrap_pyfunction!(exact_session, m)?)?;
    m.add_function(wrap_pyfunction!(run_session, m)?)?;
    m.add_function(wrap_pyfunction!(pass_probability, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(info_bound, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_csv, m)?)?;
    m.add_function(wrap_pyfunction!(repeated_query, m)?)?;
    m.add_function(wrap_pyfunction!(classical_decoy_bound, m)?)?;
    Ok(())
}
