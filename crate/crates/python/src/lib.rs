//! Python bindings for `permwalk`.
//!
//! Permutations use 1-based points on the Python side, as in cycle notation.
//! Invalid arguments raise `ValueError`; results that cannot be computed
//! (degenerate data, enumeration limits) raise `RuntimeError`.

use permwalk::experiments::measure_throughput;
use permwalk::inference::DEFAULT_ENUMERATION_LIMIT;
use permwalk::{
    Comparison, Error, FieldState, FieldTest, Permutation as CorePermutation, Side, Transposition, Walk, WalkPlan,
};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::DegenerateObserved
        | Error::EnumerationLimit { .. }
        | Error::InsufficientSamples { .. }
        | Error::RetentionDisabled
        | Error::Merge(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn side(s: &str) -> PyResult<Side> {
    match s {
        "greater" => Ok(Side::Greater),
        "less" => Ok(Side::Less),
        _ => Err(PyValueError::new_err(format!(
            "side must be 'greater' or 'less', got '{s}'"
        ))),
    }
}

fn comparison(s: &str) -> PyResult<Comparison> {
    match s {
        "strict" => Ok(Comparison::Strict),
        "at_least" => Ok(Comparison::AtLeast),
        _ => Err(PyValueError::new_err(format!(
            "comparison must be 'strict' or 'at_least', got '{s}'"
        ))),
    }
}

fn plan(walks: u64, seed: u64, burnin: u64, report_every: u64) -> WalkPlan {
    WalkPlan::new(walks, seed).burn_in(burnin).report_every(report_every)
}

/// Permutation of `1..=n`, stored as the image list `[p(1), ..., p(n)]`.
#[pyclass(module = "permwalk_py", skip_from_py_object, eq, frozen)]
#[derive(Clone, PartialEq)]
struct Permutation(CorePermutation);

#[pymethods]
impl Permutation {
    #[new]
    fn new(images: Vec<usize>) -> PyResult<Self> {
        CorePermutation::from_one_based(&images).map(Self).map_err(to_py)
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self(CorePermutation::identity(n))
    }

    /// Composes 1-based transpositions, applied left to right.
    #[staticmethod]
    fn from_transpositions(n: usize, transpositions: Vec<(usize, usize)>) -> PyResult<Self> {
        let ts = transpositions
            .into_iter()
            .map(|(a, b)| Transposition::from_one_based(a, b))
            .collect::<permwalk::Result<Vec<_>>>()
            .map_err(to_py)?;
        CorePermutation::from_transpositions(n, &ts).map(Self).map_err(to_py)
    }

    fn images(&self) -> Vec<usize> {
        self.0.to_one_based()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }

    fn __call__(&self, point: usize) -> PyResult<usize> {
        if point == 0 || point > self.0.len() {
            return Err(PyValueError::new_err(format!(
                "point {point} outside 1..={}",
                self.0.len()
            )));
        }
        Ok(self.0.apply(point - 1) + 1)
    }

    /// `self ∘ other`: apply `other` first.
    fn compose(&self, other: &Permutation) -> PyResult<Self> {
        self.0.compose(&other.0).map(Self).map_err(to_py)
    }

    fn __mul__(&self, other: &Permutation) -> PyResult<Self> {
        self.compose(other)
    }

    fn inverse(&self) -> Self {
        Self(self.0.inverse())
    }

    fn is_identity(&self) -> bool {
        self.0.is_identity()
    }

    /// Nontrivial cycles, each starting at its smallest point.
    fn cycles(&self) -> Vec<Vec<usize>> {
        self.0.cycles().iter().map(|c| c.one_based()).collect()
    }

    /// Transpositions whose left-to-right composition is this permutation.
    fn transpositions(&self) -> Vec<(usize, usize)> {
        self.0.factor_into_walks().iter().map(|t| (t.a + 1, t.b + 1)).collect()
    }

    fn __repr__(&self) -> String {
        format!("Permutation({})", self.0)
    }
}

/// Two groups with incrementally maintained sums for the pooled t statistic.
#[pyclass(module = "permwalk_py", skip_from_py_object)]
#[derive(Clone)]
struct TwoSampleState(permwalk::TwoSampleState);

#[pymethods]
impl TwoSampleState {
    #[new]
    fn new(x: Vec<f64>, y: Vec<f64>) -> PyResult<Self> {
        permwalk::TwoSampleState::new(x, y).map(Self).map_err(to_py)
    }

    /// Exchanges `x[i]` and `y[j]` (0-based).
    fn swap(&mut self, i: usize, j: usize) -> PyResult<()> {
        self.0.apply_swap(Walk { i, j }).map_err(to_py)
    }

    /// `None` when both groups are constant.
    fn t_statistic(&self) -> Option<f64> {
        self.0.t_statistic()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.0.x().to_vec()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.0.y().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "TwoSampleState(m={}, n={}, t={:?})",
            self.0.m(),
            self.0.n(),
            self.0.t_statistic()
        )
    }
}

/// Twin pairs with incrementally maintained sums for the correlation.
#[pyclass(module = "permwalk_py", skip_from_py_object)]
#[derive(Clone)]
struct PairedState(permwalk::PairedState);

#[pymethods]
impl PairedState {
    #[new]
    fn new(x: Vec<f64>, y: Vec<f64>) -> PyResult<Self> {
        permwalk::PairedState::new(x, y).map(Self).map_err(to_py)
    }

    /// Exchanges the two members of pair `i` (0-based).
    fn flip(&mut self, i: usize) -> PyResult<()> {
        self.0.apply_pair_swap(i).map_err(to_py)
    }

    fn correlation(&self) -> Option<f64> {
        self.0.correlation()
    }

    #[getter]
    fn x(&self) -> Vec<f64> {
        self.0.x().to_vec()
    }

    #[getter]
    fn y(&self) -> Vec<f64> {
        self.0.y().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("PairedState(n={}, r={:?})", self.0.n(), self.0.correlation())
    }
}

/// Exceedance counts for one observed statistic.
#[pyclass(module = "permwalk_py", skip_from_py_object, get_all)]
#[derive(Clone)]
struct PValue {
    observed: f64,
    k: u64,
    exceed: u64,
    degenerate: u64,
    p_value: Option<f64>,
}

#[pymethods]
impl PValue {
    fn __repr__(&self) -> String {
        format!(
            "PValue(observed={}, p_value={:?}, k={})",
            self.observed, self.p_value, self.k
        )
    }
}

impl From<&permwalk::PValueAccumulator> for PValue {
    fn from(a: &permwalk::PValueAccumulator) -> Self {
        Self {
            observed: a.observed,
            k: a.k,
            exceed: a.exceed,
            degenerate: a.degenerate,
            p_value: a.p_value(),
        }
    }
}

#[pyfunction]
fn direct_t(x: Vec<f64>, y: Vec<f64>) -> Option<f64> {
    permwalk::direct_t(&x, &y)
}

#[pyfunction]
fn direct_corr(x: Vec<f64>, y: Vec<f64>) -> Option<f64> {
    permwalk::direct_corr(&x, &y)
}

/// One-sided p-value of the pooled t statistic by random transposition walks.
#[pyfunction]
#[pyo3(signature = (x, y, walks = 500_000, seed = 0, side = "greater", burnin = 0))]
fn walk_pvalue(
    py: Python<'_>,
    x: Vec<f64>,
    y: Vec<f64>,
    walks: u64,
    seed: u64,
    side: &str,
    burnin: u64,
) -> PyResult<PValue> {
    let side = self::side(side)?;
    let state = permwalk::TwoSampleState::new(x, y).map_err(to_py)?;
    let acc = py
        .detach(|| permwalk::walk_pvalue(&state, side, &plan(walks, seed, burnin, 100)))
        .map_err(to_py)?;
    Ok(PValue::from(&acc))
}

/// Same estimate from full reshuffles, for comparison.
#[pyfunction]
#[pyo3(signature = (x, y, permutations = 10_000, seed = 0, side = "greater"))]
fn naive_pvalue(
    py: Python<'_>,
    x: Vec<f64>,
    y: Vec<f64>,
    permutations: u64,
    seed: u64,
    side: &str,
) -> PyResult<PValue> {
    let side = self::side(side)?;
    let acc = py
        .detach(|| permwalk::naive_mc_pvalue(&x, &y, permwalk::direct_t, side, permutations, seed))
        .map_err(to_py)?;
    Ok(PValue::from(&acc))
}

/// Exact p-value over all group assignments. Returns `(p_value, assignments, exceeding)`.
#[pyfunction]
#[pyo3(signature = (x, y, side = "greater", comparison = "strict", limit = DEFAULT_ENUMERATION_LIMIT as u64))]
fn exact_pvalue(
    py: Python<'_>,
    x: Vec<f64>,
    y: Vec<f64>,
    side: &str,
    comparison: &str,
    limit: u64,
) -> PyResult<(f64, u64, u64)> {
    let (side, cmp) = (self::side(side)?, self::comparison(comparison)?);
    let e = py
        .detach(|| permwalk::exact_enumeration_pvalue(&x, &y, permwalk::direct_t, side, cmp, limit as u128))
        .map_err(to_py)?;
    Ok((e.p_value, e.assignments, e.exceeding))
}

/// Walk-based t-tests over a field. `x` and `y` hold one row per vertex.
///
/// Returns a dict with `statistics`, `p_values`, and with `correction=True`
/// also `corrected`, `p_sup`, `p_inf` and `thresholds` at `alpha`.
#[pyfunction]
#[pyo3(signature = (x, y, walks = 500_000, seed = 0, side = "greater", correction = false, alpha = 0.05, threads = 1))]
#[allow(clippy::too_many_arguments)]
fn field_ttest<'py>(
    py: Python<'py>,
    x: Vec<Vec<f64>>,
    y: Vec<Vec<f64>>,
    walks: u64,
    seed: u64,
    side: &str,
    correction: bool,
    alpha: f64,
    threads: usize,
) -> PyResult<Bound<'py, PyDict>> {
    if x.len() != y.len() {
        return Err(PyValueError::new_err(format!(
            "{} x rows but {} y rows",
            x.len(),
            y.len()
        )));
    }
    let states = x
        .into_iter()
        .zip(y)
        .map(|(a, b)| permwalk::TwoSampleState::new(a, b))
        .collect::<permwalk::Result<Vec<_>>>()
        .map_err(to_py)?;
    let field = FieldState::new(states).map_err(to_py)?;
    let test = FieldTest {
        side: self::side(side)?,
        correction,
        retain: correction,
        threads: threads.max(1),
    };
    let res = py
        .detach(|| test.run(&field, &WalkPlan::new(walks, seed)))
        .map_err(to_py)?;
    let out = PyDict::new(py);
    out.set_item("statistics", &res.observed)?;
    out.set_item("p_values", res.pointwise_p())?;
    if let (Some(ms), Some(corrected)) = (&res.maxstat, &res.corrected) {
        out.set_item("corrected", corrected)?;
        out.set_item("p_sup", ms.p_sup())?;
        out.set_item("p_inf", ms.p_inf())?;
        out.set_item("thresholds", ms.threshold_at_alpha(alpha).map_err(to_py)?)?;
    }
    Ok(out)
}

/// Twin correlation averaged over random pair flips. Returns
/// `(mean, converged_at)`.
#[pyfunction]
#[pyo3(signature = (x, y, walks = 500_000, seed = 0, report_every = 100))]
fn average_twin_correlation(
    py: Python<'_>,
    x: Vec<f64>,
    y: Vec<f64>,
    walks: u64,
    seed: u64,
    report_every: u64,
) -> PyResult<(f64, Option<u64>)> {
    let state = permwalk::PairedState::new(x, y).map_err(to_py)?;
    let avg = py
        .detach(|| permwalk::average_twin_correlation(&state, &plan(walks, seed, 0, report_every)))
        .map_err(to_py)?;
    Ok((avg.mean, avg.converged_at))
}

/// Per-vertex `HI = C_MZ − C_DZ`.
#[pyfunction]
fn heritability_index(mz: Vec<f64>, dz: Vec<f64>) -> PyResult<Vec<f64>> {
    Ok(permwalk::heritability_index(&mz, &dz).map_err(to_py)?.hi)
}

/// Mean crossed proportion after 0..=walks transpositions.
#[pyfunction]
#[pyo3(signature = (m, n, walks = 2000, reps = 1000, seed = 0))]
fn mixing_curve(py: Python<'_>, m: usize, n: usize, walks: usize, reps: u64, seed: u64) -> PyResult<Vec<f64>> {
    let est = py
        .detach(|| permwalk::estimate_mixing(m, n, walks, reps, seed))
        .map_err(to_py)?;
    Ok(est.proportions)
}

/// Walk-based vs naive statistic evaluations per second. Returns
/// `(walks_per_second, naive_per_second, speedup)`.
#[pyfunction]
#[pyo3(signature = (m = 100, n = 100, walks = 1_000_000, naive_perms = 20_000, seed = 0))]
fn throughput(
    py: Python<'_>,
    m: usize,
    n: usize,
    walks: u64,
    naive_perms: u64,
    seed: u64,
) -> PyResult<(f64, f64, f64)> {
    let t = py
        .detach(|| measure_throughput(m, n, walks, naive_perms, seed))
        .map_err(to_py)?;
    Ok((t.walks_per_second(), t.naive_per_second(), t.speedup()))
}

#[pymodule]
pub fn permwalk_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Permutation>()?;
    m.add_class::<TwoSampleState>()?;
    m.add_class::<PairedState>()?;
    m.add_class::<PValue>()?;
    m.add_function(wrap_pyfunction!(direct_t, m)?)?;
    m.add_function(wrap_pyfunction!(direct_corr, m)?)?;
    m.add_function(wrap_pyfunction!(walk_pvalue, m)?)?;
    m.add_function(wrap_pyfunction!(naive_pvalue, m)?)?;
    m.add_function(wrap_pyfunction!(exact_pvalue, m)?)?;
    m.add_function(wrap_pyfunction!(field_ttest, m)?)?;
    m.add_function(wrap_pyfunction!(average_twin_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(heritability_index, m)?)?;
    m.add_function(wrap_pyfunction!(mixing_curve, m)?)?;
    m.add_function(wrap_pyfunction!(throughput, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
