//! Python bindings for the reconlab core: bit kernels, surprisal, exact
//! oracles, and the game runners. Build with
//! `cargo build -p reconlab-py --release` and load the produced cdylib as
//! the module `reconlab_py` (see python/smoke_test.py).

use std::collections::HashMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};

use reconlab::bits::{BitMatrix, BitVector};
use reconlab::config::{game_spec_from_kv, ExperimentConfig, KvMap};
use reconlab::estimator::{run_game as core_run_game, run_game_mia, Definition};
use reconlab::mechanisms::{noisy_average, NoiseParams};
use reconlab::rng::TrialRng;
use reconlab::scenario::{run_scenario as core_run_scenario, scenario_names};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vector(bits: &[u8]) -> PyResult<BitVector> {
    if bits.iter().any(|&b| b > 1) {
        return Err(PyValueError::new_err("bits must be 0 or 1"));
    }
    Ok(BitVector::from_bits(bits))
}

fn matrix(rows: &[Vec<u8>]) -> PyResult<BitMatrix> {
    let cols = rows.first().map_or(0, |r| r.len());
    let rows: PyResult<Vec<BitVector>> = rows.iter().map(|r| vector(r)).collect();
    BitMatrix::from_rows(rows?, cols).map_err(err)
}

/// Hamming distance between two equal-length bit vectors.
#[pyfunction]
fn hamming(a: Vec<u8>, b: Vec<u8>) -> PyResult<u32> {
    vector(&a)?.hamming(&vector(&b)?).map_err(err)
}

/// Column averages of a 0/1 matrix.
#[pyfunction]
fn average(rows: Vec<Vec<u8>>) -> PyResult<Vec<f64>> {
    Ok(matrix(&rows)?.average().map_err(err)?.values().to_vec())
}

/// Number of columns with Hamming weight in [n/4, 3n/4], bounds inclusive.
#[pyfunction]
fn lukewarm_count(rows: Vec<Vec<u8>>) -> PyResult<usize> {
    matrix(&rows)?.lukewarm_count().map_err(err)
}

/// Laplace rule of succession: (ones+1)/(rows+2).
#[pyfunction]
fn posterior_column_mean(ones: usize, rows: usize) -> PyResult<f64> {
    if ones > rows {
        return Err(PyValueError::new_err("ones exceeds rows"));
    }
    Ok(reconlab::surprisal::posterior_column_mean(ones, rows))
}

/// Surprisal (bits) of z given conditioning rows under the Beta-Bernoulli
/// column posterior.
#[pyfunction]
fn surprisal_bits(z: Vec<u8>, rows: Vec<Vec<u8>>) -> PyResult<f64> {
    reconlab::surprisal::surprisal_given_rows(&vector(&z)?, &matrix(&rows)?).map_err(err)
}

/// The candidate minimizing surprisal given the rows (column-wise posterior
/// mode, ties to 1). Returned as a list of 0/1 ints.
#[pyfunction]
fn column_mode(rows: Vec<Vec<u8>>) -> PyResult<Vec<u32>> {
    let mode = reconlab::surprisal::column_mode(&matrix(&rows)?);
    Ok(mode.iter_bits().map(|b| b as u32).collect())
}

/// Per-row XOR of adjacent column pairs (d must be even). Rows come back as
/// lists of 0/1 ints.
#[pyfunction]
fn xor_parity(rows: Vec<Vec<u8>>) -> PyResult<Vec<Vec<u32>>> {
    let released = reconlab::mechanisms::xor_parity(&matrix(&rows)?).map_err(err)?;
    let h = released.as_parity().map_err(err)?;
    Ok(h
        .rows()
        .iter()
        .map(|r| r.iter_bits().map(|b| b as u32).collect())
        .collect())
}

/// Column averages plus seeded Laplace(1/(eps_hat·n)) noise per coordinate.
#[pyfunction]
fn laplace_noisy_average(rows: Vec<Vec<u8>>, eps_hat: f64, seed: u64) -> PyResult<Vec<f64>> {
    let m = matrix(&rows)?;
    let noise = NoiseParams::new(eps_hat, m.n()).map_err(err)?;
    let mut rng = TrialRng::from_key(seed);
    let y = noisy_average(&m, &noise, &mut rng).map_err(err)?;
    Ok(y.as_real().map_err(err)?.values().to_vec())
}

/// Exact I(S; H) in bits for the XOR parity mechanism under the uniform
/// Nature (enumeration; n·d <= 12).
#[pyfunction]
fn mutual_information_xor(n: usize, d: usize) -> PyResult<f64> {
    reconlab::oracle::mutual_information_xor(n, d).map_err(err)
}

/// 95% Wilson score interval for successes out of trials.
#[pyfunction]
fn wilson_interval(successes: u64, trials: u64) -> PyResult<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(PyValueError::new_err("need 0 <= successes <= trials, trials > 0"));
    }
    Ok(reconlab::estimator::wilson_interval(successes, trials))
}

/// Run one security game from `game.*` keys (same grammar as the CLI's
/// custom scenario). Returns a dict with counts, estimates, intervals, and
/// the verdict.
#[pyfunction]
#[pyo3(signature = (spec, trials, seed, workers=1))]
fn run_game<'py>(
    py: Python<'py>,
    spec: HashMap<String, String>,
    trials: u64,
    seed: u64,
    workers: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let kv: KvMap = spec.into_iter().collect();
    let game = game_spec_from_kv(&kv, trials, seed).map_err(err)?;
    let out = PyDict::new(py);
    if game.definition == Definition::Mia {
        let est = run_game_mia(&game, workers).map_err(err)?;
        out.set_item("tpr", est.tpr_estimate())?;
        out.set_item("tpr_ci", est.tpr_ci)?;
        out.set_item("fpr", est.fpr_estimate())?;
        out.set_item("fpr_ci", est.fpr_ci)?;
        out.set_item("tpr_successes", est.tpr_successes)?;
        out.set_item("fpr_successes", est.fpr_successes)?;
        out.set_item("trials", est.trials)?;
        out.set_item("memorized_m", est.memorized_m)?;
        out.set_item("fpr_within_xi", est.fpr_within_xi)?;
    } else {
        let est = core_run_game(&game, workers).map_err(err)?;
        out.set_item("lhs", est.lhs_estimate())?;
        out.set_item("lhs_ci", est.lhs_ci)?;
        out.set_item("rhs", est.rhs_estimate())?;
        out.set_item("rhs_ci", est.rhs_ci)?;
        out.set_item("lhs_successes", est.lhs_successes)?;
        out.set_item("rhs_successes", est.rhs_successes)?;
        out.set_item("trials", est.trials)?;
        out.set_item("verdict", est.verdict.name())?;
        out.set_item("lukewarm_fraction", est.lukewarm_fraction())?;
    }
    Ok(out)
}

/// Run a named scenario in memory. Returns a dict with per-game rows and
/// whether every expectation was met. Overrides mirror the CLI's --set.
#[pyfunction]
#[pyo3(signature = (name, seed=42, trials=None, workers=1, overrides=None))]
fn run_scenario<'py>(
    py: Python<'py>,
    name: &str,
    seed: u64,
    trials: Option<u64>,
    workers: usize,
    overrides: Option<HashMap<String, String>>,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = ExperimentConfig {
        scenario: name.to_string(),
        master_seed: seed,
        trials,
        workers,
        overrides: overrides.unwrap_or_default().into_iter().collect(),
        ..ExperimentConfig::default()
    };
    let manifest = core_run_scenario(&cfg).map_err(err)?;
    let rows = PyList::empty(py);
    for r in &manifest.rows {
        let row = PyDict::new(py);
        row.set_item("game", &r.game)?;
        row.set_item("definition", &r.definition)?;
        row.set_item("trials", r.trials)?;
        row.set_item("lhs", r.lhs)?;
        row.set_item("lhs_ci", (r.lhs_lo, r.lhs_hi))?;
        row.set_item("rhs", r.rhs)?;
        row.set_item("rhs_ci", (r.rhs_lo, r.rhs_hi))?;
        row.set_item("verdict", &r.verdict)?;
        row.set_item("expected", &r.expected)?;
        row.set_item("met", r.met)?;
        rows.append(row)?;
    }
    let resolved = PyDict::new(py);
    for (k, v) in &manifest.resolved {
        resolved.set_item(k, v)?;
    }
    let out = PyDict::new(py);
    out.set_item("scenario", name)?;
    out.set_item("rows", rows)?;
    out.set_item("resolved", resolved)?;
    out.set_item("all_met", manifest.all_met())?;
    Ok(out)
}

/// Names of the registered scenarios.
#[pyfunction]
fn list_scenarios() -> Vec<String> {
    scenario_names().iter().map(|s| s.to_string()).collect()
}

#[pymodule]
fn reconlab_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(hamming, m)?)?;
    m.add_function(wrap_pyfunction!(average, m)?)?;
    m.add_function(wrap_pyfunction!(lukewarm_count, m)?)?;
    m.add_function(wrap_pyfunction!(posterior_column_mean, m)?)?;
    m.add_function(wrap_pyfunction!(surprisal_bits, m)?)?;
    m.add_function(wrap_pyfunction!(column_mode, m)?)?;
    m.add_function(wrap_pyfunction!(xor_parity, m)?)?;
    m.add_function(wrap_pyfunction!(laplace_noisy_average, m)?)?;
    m.add_function(wrap_pyfunction!(mutual_information_xor, m)?)?;
    m.add_function(wrap_pyfunction!(wilson_interval, m)?)?;
    m.add_function(wrap_pyfunction!(run_game, m)?)?;
    m.add_function(wrap_pyfunction!(run_scenario, m)?)?;
    m.add_function(wrap_pyfunction!(list_scenarios, m)?)?;
    Ok(())
}
