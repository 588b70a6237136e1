use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use bee_core::engine::{run_bee, run_fixed_committee, run_swarm};
use bee_core::policy::{self, PolicyKind, PolicySpec};
use bee_core::regret::{self, OracleMethod};
use bee_core::{committee, BeeError, CompetenceProfile, World, WorldSeed};

fn err(e: BeeError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn policy_kind(name: &str) -> PyResult<PolicyKind> {
    name.parse().map_err(|e: String| PyValueError::new_err(e))
}

fn profile(competences: Vec<f64>) -> PyResult<CompetenceProfile> {
    CompetenceProfile::new(competences).map_err(err)
}

/// Probability that the majority of the committee is right, ties counted half.
#[pyfunction]
fn committee_correct_prob(competences: Vec<f64>) -> PyResult<f64> {
    committee::committee_correct_prob(&competences).map_err(err)
}

/// Probability that an expert outside the committee agrees with its majority.
#[pyfunction]
fn pseudo_competence(p_i: f64, p_committee: f64) -> f64 {
    committee::pseudo_competence_exact(p_i, p_committee)
}

#[pyfunction]
fn pseudo_gap(p_i: f64, p_j: f64, p_committee: f64) -> f64 {
    committee::pseudo_gap(p_i, p_j, p_committee)
}

#[pyfunction]
fn kl_divergence(p: f64, q: f64) -> f64 {
    policy::kl_divergence(p, q)
}

#[pyfunction]
#[pyo3(signature = (estimate, consults, budget, tolerance = 1e-9))]
fn klucb_upper(estimate: f64, consults: f64, budget: f64, tolerance: f64) -> f64 {
    policy::klucb_upper(estimate, consults, budget, tolerance)
}

/// (accuracy, standard error, method) of the true-weight vote over the top `m` experts.
#[pyfunction]
fn oracle_committee_accuracy(competences: Vec<f64>, m: usize) -> PyResult<(f64, f64, &'static str)> {
    let o = regret::oracle_committee_accuracy(&profile(competences)?, m).map_err(err)?;
    let method = match o.method {
        OracleMethod::Enumeration => "enumeration",
        OracleMethod::MonteCarlo => "monte-carlo",
    };
    Ok((o.value, o.std_error, method))
}

/// Regret bound for a leader picked outside the pinned `committee`.
#[pyfunction]
#[pyo3(signature = (competences, committee, policy, horizon, thompson_epsilon = regret::DEFAULT_THOMPSON_EPSILON))]
fn lemma_bound<'py>(
    py: Python<'py>,
    competences: Vec<f64>,
    committee: Vec<usize>,
    policy: &str,
    horizon: u64,
    thompson_epsilon: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let b = regret::lemma_bound(&profile(competences)?, &committee, policy_kind(policy)?, horizon, thompson_epsilon)
        .map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("bound", b.bound)?;
    d.set_item("phi", b.params.potential)?;
    d.set_item("p_committee", b.params.committee_correct)?;
    d.set_item("constant", b.params.constant)?;
    Ok(d)
}

/// Runs one simulation and returns its regret and per-round trace.
///
/// `mode` is "bee", "swarm" or "fixed-committee"; the last needs `peers` and
/// ignores `m`.
#[pyfunction]
#[pyo3(signature = (mode, competences, policy, m, horizon, seed, replication = 0, peers = None))]
#[allow(clippy::too_many_arguments)]
fn run<'py>(
    py: Python<'py>,
    mode: &str,
    competences: Vec<f64>,
    policy: &str,
    m: usize,
    horizon: u64,
    seed: u64,
    replication: u64,
    peers: Option<Vec<usize>>,
) -> PyResult<Bound<'py, PyDict>> {
    let profile = profile(competences)?;
    let spec = PolicySpec::new(policy_kind(policy)?).with_horizon(horizon, profile.expert_count());
    let mut world = World::new(profile.clone(), WorldSeed::with_replication(seed, replication));
    let trace = match mode {
        "bee" => run_bee(&mut world, &spec, m, horizon),
        "swarm" => run_swarm(&mut world, &spec, m, horizon),
        "fixed-committee" => {
            let peers = peers.ok_or_else(|| PyValueError::new_err("fixed-committee needs peers"))?;
            run_fixed_committee(&mut world, &spec, &peers, horizon)
        }
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    }
    .map_err(err)?;
    let report = if mode == "swarm" {
        let baseline = regret::oracle_committee_accuracy(&profile, m).map_err(err)?.value;
        regret::swarm_report(&trace, baseline)
    } else {
        regret::bee_report(&trace, &profile)
    };
    let d = PyDict::new(py);
    d.set_item("realized_regret", report.normalized_realized)?;
    d.set_item("pseudo_regret", report.normalized_pseudo)?;
    d.set_item("baseline", report.baseline)?;
    d.set_item("leaders", trace.rounds.iter().map(|r| r.leader).collect::<Vec<_>>())?;
    d.set_item("decision_correct", trace.rounds.iter().map(|r| r.decision_correct()).collect::<Vec<_>>())?;
    d.set_item("consults", trace.stats.iter().map(|s| s.consults).collect::<Vec<_>>())?;
    d.set_item("agreements", trace.stats.iter().map(|s| s.agreements).collect::<Vec<_>>())?;
    Ok(d)
}

#[pymodule]
fn bee_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(committee_correct_prob, m)?)?;
    m.add_function(wrap_pyfunction!(pseudo_competence, m)?)?;
    m.add_function(wrap_pyfunction!(pseudo_gap, m)?)?;
    m.add_function(wrap_pyfunction!(kl_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(klucb_upper, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_committee_accuracy, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_bound, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
