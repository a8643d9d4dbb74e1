//! Python bindings: the RN+YpR parameter set, the condition checker, the
//! single-copy and coupled simulators, the branching/dual-set processes
//! and the first-moment analytics.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use ipslab::alphabet::{AlphabetOrder, Nucleotide, OrderId};
use ipslab::analytics;
use ipslab::checker;
use ipslab::dual;
use ipslab::kernel::CutPasteKernel;
use ipslab::rates;
use ipslab::rates::RnYprParams;
use ipslab::ring::{self, RingConfig};
use ipslab::sim;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_error(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn parse_letter(s: &str) -> PyResult<Nucleotide> {
    let mut chars = s.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Nucleotide::from_char(c).map_err(value_error),
        _ => Err(value_error(format!("expected a single letter, got {s:?}"))),
    }
}

fn parse_order(s: &str) -> PyResult<AlphabetOrder> {
    Ok(AlphabetOrder::from_id(
        OrderId::parse(s).map_err(value_error)?,
    ))
}

fn json_to_py<'py>(py: Python<'py>, value: &serde_json::Value) -> PyResult<Bound<'py, PyAny>> {
    Ok(match value {
        serde_json::Value::Null => py.None().into_bound(py),
        serde_json::Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any(),
        serde_json::Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_pyobject(py)?.into_any()
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any()
            }
        }
        serde_json::Value::String(s) => s.into_pyobject(py)?.into_any(),
        serde_json::Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_any()
        }
        serde_json::Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, v) in map {
                dict.set_item(k, json_to_py(py, v)?)?;
            }
            dict.into_any()
        }
    })
}

fn to_py_json<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let json = serde_json::to_value(value).map_err(runtime_error)?;
    json_to_py(py, &json)
}

/// The sixteen RN+YpR substitution rates.
#[pyclass(name = "RnYprParams", frozen, from_py_object)]
#[derive(Clone)]
struct PyRnYprParams {
    inner: RnYprParams,
}

#[pymethods]
impl PyRnYprParams {
    /// Full sixteen-rate constructor.
    #[new]
    #[allow(clippy::too_many_arguments)]
    #[pyo3(signature = (v_a, v_t, v_c, v_g, w_a, w_t, w_c, w_g,
                        r_a_c=0.0, r_a_t=0.0, r_t_a=0.0, r_t_g=0.0,
                        r_c_a=0.0, r_c_g=0.0, r_g_c=0.0, r_g_t=0.0))]
    fn new(
        v_a: f64,
        v_t: f64,
        v_c: f64,
        v_g: f64,
        w_a: f64,
        w_t: f64,
        w_c: f64,
        w_g: f64,
        r_a_c: f64,
        r_a_t: f64,
        r_t_a: f64,
        r_t_g: f64,
        r_c_a: f64,
        r_c_g: f64,
        r_g_c: f64,
        r_g_t: f64,
    ) -> PyResult<Self> {
        let inner = RnYprParams::new(
            [v_a, v_t, v_c, v_g],
            [w_a, w_t, w_c, w_g],
            r_a_c,
            r_a_t,
            r_t_a,
            r_t_g,
            r_c_a,
            r_c_g,
            r_g_c,
            r_g_t,
        )
        .map_err(value_error)?;
        Ok(PyRnYprParams { inner })
    }

    /// T92 specialization.
    #[staticmethod]
    #[pyo3(signature = (theta, v, w, r=0.0))]
    fn t92(theta: f64, v: f64, w: f64, r: f64) -> PyResult<Self> {
        Ok(PyRnYprParams {
            inner: rates::specialize_t92(theta, v, w, r).map_err(value_error)?,
        })
    }

    /// JC specialization.
    #[staticmethod]
    #[pyo3(signature = (v, r=0.0))]
    fn jc(v: f64, r: f64) -> PyResult<Self> {
        Ok(PyRnYprParams {
            inner: rates::specialize_jc(v, r).map_err(value_error)?,
        })
    }

    /// Strand-complementary specialization.
    #[staticmethod]
    #[pyo3(signature = (v_w, v_s, w_w, w_s, r_u=0.0, r_w=0.0, r_s=0.0, r_v=0.0))]
    #[allow(clippy::too_many_arguments)]
    fn rnc(
        v_w: f64,
        v_s: f64,
        w_w: f64,
        w_s: f64,
        r_u: f64,
        r_w: f64,
        r_s: f64,
        r_v: f64,
    ) -> PyResult<Self> {
        Ok(PyRnYprParams {
            inner: rates::specialize_rnc(v_w, v_s, w_w, w_s, r_u, r_w, r_s, r_v)
                .map_err(value_error)?,
        })
    }

    /// Rate toward `target` on the window `(left, center, right)`.
    fn substitution_rate(
        &self,
        target: &str,
        left: &str,
        center: &str,
        right: &str,
    ) -> PyResult<f64> {
        Ok(rates::substitution_rate(
            &self.inner,
            parse_letter(target)?,
            parse_letter(left)?,
            parse_letter(center)?,
            parse_letter(right)?,
        ))
    }

    /// Every derived constant as a dictionary.
    fn derived_constants<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py_json(py, &rates::derived_constants(&self.inner))
    }

    fn to_dict<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_py_json(py, &self.inner)
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

/// Rank of a letter under an order (1 = minimal .. 4 = maximal).
#[pyfunction]
fn rank(order: &str, letter: &str) -> PyResult<u8> {
    Ok(parse_order(order)?.rank(parse_letter(letter)?))
}

/// Site-wise comparison of two configuration strings under an order.
#[pyfunction]
fn config_leq(eta: &str, xi: &str, order: &str) -> PyResult<bool> {
    let eta = RingConfig::parse(eta).map_err(value_error)?;
    let xi = RingConfig::parse(xi).map_err(value_error)?;
    ring::config_leq(&eta, &xi, &parse_order(order)?).map_err(value_error)
}

/// Move the letter at `x` to `y`, shifting the segment in between.
#[pyfunction]
fn apply_sigma(config: &str, x: usize, y: usize) -> PyResult<String> {
    let cfg = RingConfig::parse(config).map_err(value_error)?;
    Ok(ring::apply_sigma(&cfg, x, y)
        .map_err(value_error)?
        .to_string())
}

/// Displacement form of the permutation, wrapping around the ring.
#[pyfunction]
fn apply_sigma_displacement(config: &str, x: usize, k: i64) -> PyResult<String> {
    let cfg = RingConfig::parse(config).map_err(value_error)?;
    Ok(ring::apply_sigma_displacement(&cfg, x, k)
        .map_err(value_error)?
        .to_string())
}

/// The full ergodicity/attractiveness report as a dictionary.
#[pyfunction]
fn ergodicity_report<'py>(py: Python<'py>, params: &PyRnYprParams) -> PyResult<Bound<'py, PyAny>> {
    let report = checker::ergodicity_report(&params.inner).map_err(runtime_error)?;
    to_py_json(py, &report)
}

#[pyfunction]
fn check_attractiveness(params: &PyRnYprParams, order: &str) -> PyResult<bool> {
    checker::check_attractiveness(&params.inner, &parse_order(order)?).map_err(runtime_error)
}

#[pyfunction]
fn check_nu_diag(params: &PyRnYprParams, order: &str) -> PyResult<bool> {
    checker::check_nu_diag(&params.inner, &parse_order(order)?).map_err(value_error)
}

fn build_kernel(rho: f64, weights: Option<Vec<(i64, f64)>>) -> PyResult<CutPasteKernel> {
    match weights {
        Some(w) => CutPasteKernel::new(rho, w).map_err(value_error),
        None => Ok(CutPasteKernel::stirring(rho)),
    }
}

fn build_init(n: usize, init: &str) -> PyResult<sim::InitialConfig> {
    Ok(match init {
        "all-a" => sim::InitialConfig::AllA,
        "all-t" => sim::InitialConfig::AllT,
        "all-c" => sim::InitialConfig::AllC,
        "all-g" => sim::InitialConfig::AllG,
        "uniform-random" => sim::InitialConfig::UniformRandom,
        explicit => {
            let cfg = RingConfig::parse(explicit).map_err(value_error)?;
            if cfg.len() != n {
                return Err(value_error(format!(
                    "initial configuration has {} sites, expected {n}",
                    cfg.len()
                )));
            }
            sim::InitialConfig::Explicit(cfg)
        }
    })
}

/// Single-copy trajectory statistics.
#[pyclass(name = "TrajectoryStats", frozen)]
struct PyTrajectoryStats {
    inner: sim::TrajectoryStats,
}

#[pymethods]
impl PyTrajectoryStats {
    #[getter]
    fn time(&self) -> f64 {
        self.inner.time
    }

    #[getter]
    fn samples(&self) -> usize {
        self.inner.samples
    }

    #[getter]
    fn final_config(&self) -> String {
        self.inner.final_config.to_string()
    }

    #[getter]
    fn cut_paste_events(&self) -> u64 {
        self.inner.cut_paste_events
    }

    #[getter]
    fn substitution_events(&self) -> [u64; 4] {
        self.inner.substitution_events
    }

    /// `{letter: (mean, se)}`.
    fn marginals<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let dict = PyDict::new(py);
        for letter in Nucleotide::ALL {
            let m = self.inner.marginal(letter);
            dict.set_item(letter.to_char().to_string(), (m.mean, m.se))?;
        }
        Ok(dict)
    }

    /// `{"xy": (mean, se)}` over the sixteen adjacent pairs.
    fn pairs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let dict = PyDict::new(py);
        for x in Nucleotide::ALL {
            for y in Nucleotide::ALL {
                let p = self.inner.pair(x, y);
                dict.set_item(format!("{x}{y}"), (p.mean, p.se))?;
            }
        }
        Ok(dict)
    }

    /// The raw samples as `(t, marginals, pairs)` tuples.
    fn rows<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyList>> {
        let out = PyList::empty(py);
        for row in &self.inner.rows {
            let pairs: Vec<Vec<f64>> = row.pairs.iter().map(|r| r.to_vec()).collect();
            out.append((row.t, row.marginals.to_vec(), pairs))?;
        }
        Ok(out)
    }
}

#[allow(clippy::too_many_arguments)]
fn build_spec(
    params: &PyRnYprParams,
    rho: f64,
    weights: Option<Vec<(i64, f64)>>,
    ring_n: usize,
    init: &str,
    seed: u64,
    sample_interval: f64,
    horizon: f64,
) -> PyResult<sim::SimSpec> {
    Ok(sim::SimSpec {
        model: sim::RateModelSpec::RnYpr(params.inner),
        kernel: build_kernel(rho, weights)?,
        ring_n,
        init: build_init(ring_n, init)?,
        horizon: sim::Horizon::Time(horizon),
        seed,
        stream: 0,
        sample_interval,
        max_events: None,
        debug_check_interval: None,
    })
}

/// Simulate the superimposed process over a time horizon.
#[pyfunction]
#[pyo3(signature = (params, horizon, ring_n=64, rho=1.0, weights=None,
                    init="uniform-random", seed=0, sample_interval=1.0))]
#[allow(clippy::too_many_arguments)]
fn simulate(
    params: &PyRnYprParams,
    horizon: f64,
    ring_n: usize,
    rho: f64,
    weights: Option<Vec<(i64, f64)>>,
    init: &str,
    seed: u64,
    sample_interval: f64,
) -> PyResult<PyTrajectoryStats> {
    let spec = build_spec(
        params,
        rho,
        weights,
        ring_n,
        init,
        seed,
        sample_interval,
        horizon,
    )?;
    Ok(PyTrajectoryStats {
        inner: sim::simulate(&spec).map_err(runtime_error)?,
    })
}

/// Burn in, then collect stationary frequency samples.
#[pyfunction]
#[pyo3(signature = (params, burn_in, sample_interval, samples, ring_n=64,
                    rho=1.0, weights=None, init="uniform-random", seed=0))]
#[allow(clippy::too_many_arguments)]
fn estimate_stationary(
    params: &PyRnYprParams,
    burn_in: f64,
    sample_interval: f64,
    samples: usize,
    ring_n: usize,
    rho: f64,
    weights: Option<Vec<(i64, f64)>>,
    init: &str,
    seed: u64,
) -> PyResult<PyTrajectoryStats> {
    let spec = build_spec(
        params,
        rho,
        weights,
        ring_n,
        init,
        seed,
        sample_interval,
        1.0,
    )?;
    Ok(PyTrajectoryStats {
        inner: sim::estimate_stationary(&spec, burn_in, sample_interval, samples)
            .map_err(runtime_error)?,
    })
}

/// Coupled-run statistics.
#[pyclass(name = "CoupledStats", frozen)]
struct PyCoupledStats {
    inner: sim::CoupledStats,
    order: AlphabetOrder,
}

#[pymethods]
impl PyCoupledStats {
    #[getter]
    fn order_violations(&self) -> u64 {
        self.inner.order_violations
    }

    #[getter]
    fn coalescence_time(&self) -> Option<f64> {
        self.inner.coalescence_time
    }

    #[getter]
    fn discrepancy_freq(&self) -> f64 {
        self.inner.discrepancy_freq
    }

    #[getter]
    fn time(&self) -> f64 {
        self.inner.time
    }

    #[getter]
    fn events(&self) -> u64 {
        self.inner.events
    }

    #[getter]
    fn cross_class_freq(&self) -> f64 {
        self.inner.cross_class_freq(&self.order)
    }

    #[getter]
    fn within_class_freq(&self) -> f64 {
        self.inner.within_class_freq(&self.order)
    }

    /// Time-averaged `(lower, upper)` pair frequencies as `{"xy": freq}`.
    fn pair_freqs<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let dict = PyDict::new(py);
        for x in Nucleotide::ALL {
            for y in Nucleotide::ALL {
                dict.set_item(format!("{x}{y}"), self.inner.pair_freq(x, y))?;
            }
        }
        Ok(dict)
    }
}

/// Simulate the basic coupling from two ordered configuration strings.
#[pyfunction]
#[pyo3(signature = (params, order, lower, upper, horizon, rho=1.0, weights=None,
                    seed=0, sample_interval=1.0))]
#[allow(clippy::too_many_arguments)]
fn simulate_coupled(
    params: &PyRnYprParams,
    order: &str,
    lower: &str,
    upper: &str,
    horizon: f64,
    rho: f64,
    weights: Option<Vec<(i64, f64)>>,
    seed: u64,
    sample_interval: f64,
) -> PyResult<PyCoupledStats> {
    let order = parse_order(order)?;
    let lower = RingConfig::parse(lower).map_err(value_error)?;
    let upper = RingConfig::parse(upper).map_err(value_error)?;
    let spec = build_spec(
        params,
        rho,
        weights,
        lower.len(),
        "uniform-random",
        seed,
        sample_interval,
        horizon,
    )?;
    Ok(PyCoupledStats {
        inner: sim::simulate_coupled(&spec, &order, &lower, &upper).map_err(value_error)?,
        order,
    })
}

/// Long-run coupled pair frequencies from the extreme pair of the order.
#[pyfunction]
#[pyo3(signature = (params, order, burn_in, samples, ring_n=64, rho=1.0,
                    weights=None, seed=0, sample_interval=1.0))]
#[allow(clippy::too_many_arguments)]
fn stationary_coupled_pairs(
    params: &PyRnYprParams,
    order: &str,
    burn_in: f64,
    samples: usize,
    ring_n: usize,
    rho: f64,
    weights: Option<Vec<(i64, f64)>>,
    seed: u64,
    sample_interval: f64,
) -> PyResult<PyCoupledStats> {
    let order = parse_order(order)?;
    let spec = build_spec(
        params,
        rho,
        weights,
        ring_n,
        "uniform-random",
        seed,
        sample_interval,
        1.0,
    )?;
    Ok(PyCoupledStats {
        inner: sim::stationary_coupled_pairs(&spec, &order, burn_in, samples)
            .map_err(value_error)?,
        order,
    })
}

/// Mean offspring of the dominating branching process.
#[pyfunction]
fn mean_offspring(s: u32, lambda_bar: f64, lambda_bar_0: f64) -> PyResult<f64> {
    dual::mean_offspring(&branching_spec(
        s,
        lambda_bar,
        lambda_bar_0,
        1,
        1,
        1.0,
        10,
        0,
    )?)
    .map_err(value_error)
}

/// Extinction probability of the dominating branching process.
#[pyfunction]
fn extinction_fixed_point(s: u32, lambda_bar: f64, lambda_bar_0: f64) -> PyResult<f64> {
    dual::extinction_fixed_point(&branching_spec(
        s,
        lambda_bar,
        lambda_bar_0,
        1,
        1,
        1.0,
        10,
        0,
    )?)
    .map_err(value_error)
}

#[allow(clippy::too_many_arguments)]
fn branching_spec(
    s: u32,
    lambda_bar: f64,
    lambda_bar_0: f64,
    initial: u64,
    runs: u64,
    horizon: f64,
    cap: u64,
    seed: u64,
) -> PyResult<dual::BranchingSpec> {
    let spec = dual::BranchingSpec {
        s,
        lambda_bar,
        lambda_bar_0,
        initial,
        runs,
        horizon,
        cap,
        seed,
        survival_points: 20,
    };
    spec.validate().map_err(value_error)?;
    Ok(spec)
}

/// Monte Carlo branching ensemble; returns a dictionary of outcomes.
#[pyfunction]
#[pyo3(signature = (s, lambda_bar, lambda_bar_0, runs=10_000, horizon=30.0,
                    initial=1, cap=1_000_000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn simulate_branching<'py>(
    py: Python<'py>,
    s: u32,
    lambda_bar: f64,
    lambda_bar_0: f64,
    runs: u64,
    horizon: f64,
    initial: u64,
    cap: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = branching_spec(
        s,
        lambda_bar,
        lambda_bar_0,
        initial,
        runs,
        horizon,
        cap,
        seed,
    )?;
    let outcome = dual::simulate_branching(&spec).map_err(runtime_error)?;
    to_py_json(py, &outcome)
}

/// Dual-set ensemble of an RN+YpR model; returns a dictionary of curves.
#[pyfunction]
#[pyo3(signature = (params, initial_set, checkpoints, ring_n=64, rho=1.0,
                    weights=None, runs=2_000, seed=0))]
#[allow(clippy::too_many_arguments)]
fn simulate_dual_set<'py>(
    py: Python<'py>,
    params: &PyRnYprParams,
    initial_set: Vec<usize>,
    checkpoints: Vec<f64>,
    ring_n: usize,
    rho: f64,
    weights: Option<Vec<(i64, f64)>>,
    runs: u64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let horizon = checkpoints.last().copied().unwrap_or(1.0);
    let spec = dual::DualSetSpec {
        model: rates::GenericRateModel::from_rnypr(&params.inner),
        kernel: build_kernel(rho, weights)?,
        ring_n,
        initial_set,
        horizon,
        runs,
        seed,
        checkpoints,
    };
    let outcome = dual::simulate_dual_set(&spec).map_err(value_error)?;
    to_py_json(py, &outcome)
}

/// Closed-form stationary marginals given the interaction terms.
#[pyfunction]
#[pyo3(signature = (params, r_y=0.0, r_r=0.0))]
fn solve_first_moments<'py>(
    py: Python<'py>,
    params: &PyRnYprParams,
    r_y: f64,
    r_r: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let solution = analytics::solve_first_moments(&params.inner, r_y, r_r).map_err(value_error)?;
    to_py_json(py, &solution)
}

/// Residuals of the stationary moment system on measured frequencies.
#[pyfunction]
fn moment_residuals<'py>(
    py: Python<'py>,
    params: &PyRnYprParams,
    marginals: [f64; 4],
    pairs: [[f64; 4]; 4],
) -> PyResult<Bound<'py, PyAny>> {
    let residuals = analytics::moment_residuals_from_freqs(&params.inner, &marginals, &pairs);
    to_py_json(py, &residuals.to_vec())
}

/// Invariant law of an independent-site generator matrix (row-major 4x4,
/// letters in order a, t, c, g).
#[pyfunction]
fn independent_invariant(q: [[f64; 4]; 4]) -> PyResult<[f64; 4]> {
    let q = rates::QMatrix::from_rates(q).map_err(value_error)?;
    analytics::independent_invariant(&q).map_err(value_error)
}

#[pymodule]
fn ipslab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRnYprParams>()?;
    m.add_class::<PyTrajectoryStats>()?;
    m.add_class::<PyCoupledStats>()?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(config_leq, m)?)?;
    m.add_function(wrap_pyfunction!(apply_sigma, m)?)?;
    m.add_function(wrap_pyfunction!(apply_sigma_displacement, m)?)?;
    m.add_function(wrap_pyfunction!(ergodicity_report, m)?)?;
    m.add_function(wrap_pyfunction!(check_attractiveness, m)?)?;
    m.add_function(wrap_pyfunction!(check_nu_diag, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_stationary, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_coupled, m)?)?;
    m.add_function(wrap_pyfunction!(stationary_coupled_pairs, m)?)?;
    m.add_function(wrap_pyfunction!(mean_offspring, m)?)?;
    m.add_function(wrap_pyfunction!(extinction_fixed_point, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_branching, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_dual_set, m)?)?;
    m.add_function(wrap_pyfunction!(solve_first_moments, m)?)?;
    m.add_function(wrap_pyfunction!(moment_residuals, m)?)?;
    m.add_function(wrap_pyfunction!(independent_invariant, m)?)?;
    Ok(())
}
