//! Regret against oracle baselines, and the fixed-committee regret bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::committee::committee_correct_prob;
use crate::engine::{RunMode, RunTrace, AGGREGATE_TIE_TOLERANCE};
use crate::error::{BeeError, Result};
use crate::policy::PolicyKind;
use crate::world::CompetenceProfile;

/// Largest committee whose oracle accuracy is enumerated exactly.
pub const ORACLE_ENUMERATION_LIMIT: usize = 20;
pub const ORACLE_MC_SAMPLES: u64 = 10_000_000;
const ORACLE_MC_SEED: u64 = 0x0005_eed0_0c1e;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicationStats {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single replication.
    pub std: f64,
    pub count: usize,
}

impl ReplicationStats {
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self { mean: f64::NAN, std: f64::NAN, count };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, std, count }
    }
}

/// Regret of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretReport {
    pub normalized_realized: f64,
    pub normalized_pseudo: f64,
    /// Best competence for BEE, oracle committee accuracy for SWARM.
    pub baseline: f64,
    /// Running sums (not normalized) of the per-round realized regret.
    pub cumulative_realized: Vec<f64>,
    /// Running sums of the per-round pseudo regret.
    pub cumulative_pseudo: Vec<f64>,
}

fn running_sum(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut acc = 0.0;
    values
        .map(|v| {
            acc += v;
            acc
        })
        .collect()
}

/// Normalized realized regret from aligned per-round correctness indicators.
pub fn realized_regret_from(best_correct: &[bool], decision_correct: &[bool]) -> Result<f64> {
    if best_correct.len() != decision_correct.len() {
        return Err(BeeError::LengthMismatch { trace: decision_correct.len(), expected: best_correct.len() });
    }
    if best_correct.is_empty() {
        return Ok(0.0);
    }
    let t = best_correct.len() as f64;
    let best = best_correct.iter().filter(|&&c| c).count() as f64;
    let ours = decision_correct.iter().filter(|&&c| c).count() as f64;
    Ok(best / t - ours / t)
}

pub fn realized_regret(trace: &RunTrace) -> f64 {
    let best: Vec<bool> = trace.rounds.iter().map(|r| r.best_expert_correct).collect();
    let ours: Vec<bool> = trace.rounds.iter().map(|r| r.decision_correct()).collect();
    realized_regret_from(&best, &ours).expect("aligned by construction")
}

/// `max p - mean p_{leader}` over the trace.
pub fn pseudo_regret_bee(trace: &RunTrace, profile: &CompetenceProfile) -> f64 {
    if trace.rounds.is_empty() {
        return 0.0;
    }
    let mean = trace.rounds.iter().map(|r| profile.get(r.leader)).sum::<f64>() / trace.rounds.len() as f64;
    profile.best_competence() - mean
}

fn per_round_realized(trace: &RunTrace) -> impl Iterator<Item = f64> + '_ {
    trace
        .rounds
        .iter()
        .map(|r| f64::from(u8::from(r.best_expert_correct)) - f64::from(u8::from(r.decision_correct())))
}

/// Full BEE report: realized regret and leader pseudo regret.
pub fn bee_report(trace: &RunTrace, profile: &CompetenceProfile) -> RegretReport {
    let best = profile.best_competence();
    let cumulative_realized = running_sum(per_round_realized(trace));
    let cumulative_pseudo = running_sum(trace.rounds.iter().map(|r| best - profile.get(r.leader)));
    RegretReport {
        normalized_realized: realized_regret(trace),
        normalized_pseudo: pseudo_regret_bee(trace, profile),
        baseline: best,
        cumulative_realized,
        cumulative_pseudo,
    }
}

/// Full SWARM report against an oracle committee accuracy `baseline`.
pub fn swarm_report(trace: &RunTrace, baseline: f64) -> RegretReport {
    let t = trace.rounds.len().max(1) as f64;
    let cumulative_pseudo =
        running_sum(trace.rounds.iter().map(|r| baseline - f64::from(u8::from(r.decision_correct()))));
    let normalized_pseudo = cumulative_pseudo.last().copied().unwrap_or(0.0) / t;
    RegretReport {
        normalized_realized: realized_regret(trace),
        normalized_pseudo,
        baseline,
        cumulative_realized: running_sum(per_round_realized(trace)),
        cumulative_pseudo,
    }
}

pub fn report(trace: &RunTrace, profile: &CompetenceProfile, swarm_baseline: f64) -> RegretReport {
    match trace.mode {
        RunMode::Swarm => swarm_report(trace, swarm_baseline),
        _ => bee_report(trace, profile),
    }
}

/// Experts sorted by decreasing competence, ties by lower index; first `m`.
pub fn top_experts(profile: &CompetenceProfile, m: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..profile.expert_count()).collect();
    order.sort_by(|&a, &b| profile.get(b).total_cmp(&profile.get(a)).then(a.cmp(&b)));
    order.truncate(m);
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleMethod {
    Enumeration,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleAccuracy {
    pub value: f64,
    /// Standard error of a Monte Carlo estimate, 0 for enumeration.
    pub std_error: f64,
    pub method: OracleMethod,
}

fn vote_score(sum: f64) -> f64 {
    if sum > AGGREGATE_TIE_TOLERANCE {
        1.0
    } else if sum < -AGGREGATE_TIE_TOLERANCE {
        0.0
    } else {
        0.5
    }
}

/// Exact accuracy of the true-weight linearized naive Bayes vote over a committee.
pub fn weighted_vote_accuracy_exact(competences: &[f64]) -> f64 {
    let n = competences.len();
    assert!(n <= 30, "enumeration over 2^{n} patterns");
    let weights: Vec<f64> = competences.iter().map(|p| p - 0.5).collect();
    let chunk = |hi_bits: u64| -> f64 {
        // split the outermost bits across threads
        let low = n.min(16);
        let mut total = 0.0;
        for low_mask in 0u64..(1 << low) {
            let mask = low_mask | hi_bits << low;
            let mut prob = 1.0;
            let mut sum = 0.0;
            for k in 0..n {
                if mask >> k & 1 == 1 {
                    prob *= competences[k];
                    sum += weights[k];
                } else {
                    prob *= 1.0 - competences[k];
                    sum -= weights[k];
                }
            }
            total += prob * vote_score(sum);
        }
        total
    };
    let high = n.saturating_sub(16);
    (0u64..(1 << high)).into_par_iter().map(chunk).collect::<Vec<_>>().iter().sum()
}

/// Monte Carlo accuracy of the true-weight vote; returns (estimate, standard error).
pub fn weighted_vote_accuracy_mc(competences: &[f64], samples: u64, seed: u64) -> (f64, f64) {
    let weights: Vec<f64> = competences.iter().map(|p| p - 0.5).collect();
    let chunks = 64u64;
    let per = samples / chunks;
    let total: f64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = if c == chunks - 1 { samples - per * (chunks - 1) } else { per };
            let mut acc = 0.0;
            for _ in 0..n {
                let sum: f64 = competences
                    .iter()
                    .zip(&weights)
                    .map(|(&p, &w)| if rng.random::<f64>() < p { w } else { -w })
                    .sum();
                acc += vote_score(sum);
            }
            acc
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    let mean = total / samples as f64;
    // ties score 1/2, so this is a slight overestimate of the spread
    let se = (mean * (1.0 - mean) / samples as f64).sqrt();
    (mean, se)
}

/// Accuracy of the true-weight vote over the `m` most competent experts.
pub fn oracle_committee_accuracy(profile: &CompetenceProfile, m: usize) -> Result<OracleAccuracy> {
    oracle_committee_accuracy_with(profile, m, ORACLE_MC_SAMPLES)
}

pub fn oracle_committee_accuracy_with(profile: &CompetenceProfile, m: usize, mc_samples: u64) -> Result<OracleAccuracy> {
    if m == 0 || m > profile.expert_count() {
        return Err(BeeError::InvalidCommitteeSize { m, experts: profile.expert_count() });
    }
    let competences: Vec<f64> = top_experts(profile, m).iter().map(|&i| profile.get(i)).collect();
    Ok(if m <= ORACLE_ENUMERATION_LIMIT {
        OracleAccuracy {
            value: weighted_vote_accuracy_exact(&competences),
            std_error: 0.0,
            method: OracleMethod::Enumeration,
        }
    } else {
        let (value, std_error) = weighted_vote_accuracy_mc(&competences, mc_samples, ORACLE_MC_SEED);
        OracleAccuracy { value, std_error, method: OracleMethod::MonteCarlo }
    })
}

/// Best true-weight vote accuracy over every size-`m` committee, by exhaustive
/// search. Only sensible for small populations.
pub fn oracle_best_committee_exhaustive(profile: &CompetenceProfile, m: usize) -> Result<(Vec<usize>, f64)> {
    let n = profile.expert_count();
    if m == 0 || m > n {
        return Err(BeeError::InvalidCommitteeSize { m, experts: n });
    }
    let mut best: (Vec<usize>, f64) = (Vec::new(), f64::NEG_INFINITY);
    let mut combo: Vec<usize> = (0..m).collect();
    loop {
        let ps: Vec<f64> = combo.iter().map(|&i| profile.get(i)).collect();
        let acc = weighted_vote_accuracy_exact(&ps);
        if acc > best.1 {
            best = (combo.clone(), acc);
        }
        // next combination in lexicographic order
        let mut k = m;
        while k > 0 && combo[k - 1] == n - m + k - 1 {
            k -= 1;
        }
        if k == 0 {
            break;
        }
        combo[k - 1] += 1;
        for j in k..m {
            combo[j] = combo[j - 1] + 1;
        }
    }
    Ok(best)
}

/// `oracle - mean decision accuracy` over replications sharing one profile.
pub fn pseudo_regret_swarm(traces: &[RunTrace], profile: &CompetenceProfile, m: usize) -> Result<ReplicationStats> {
    let oracle = oracle_committee_accuracy(profile, m)?;
    Ok(pseudo_regret_swarm_against(traces, oracle.value))
}

pub fn pseudo_regret_swarm_against(traces: &[RunTrace], baseline: f64) -> ReplicationStats {
    let values: Vec<f64> = traces
        .iter()
        .map(|t| {
            let correct = t.rounds.iter().filter(|r| r.decision_correct()).count() as f64;
            baseline - correct / t.rounds.len().max(1) as f64
        })
        .collect();
    ReplicationStats::from_values(&values)
}

/// `max_j p_j - p_i` for every expert.
pub fn gaps(profile: &CompetenceProfile) -> Vec<f64> {
    let best = profile.best_competence();
    profile.competences().iter().map(|p| best - p).collect()
}

/// `(ln T / T) * sum over experts outside the committee with positive gap of 1 / gap`.
pub fn potential(profile: &CompetenceProfile, committee: &[usize], horizon: u64) -> f64 {
    let t = horizon as f64;
    let inverse_gaps: f64 = gaps(profile)
        .iter()
        .enumerate()
        .filter(|(i, g)| !committee.contains(i) && **g > 0.0)
        .map(|(_, g)| 1.0 / g)
        .sum();
    t.ln() / t * inverse_gaps
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundParams {
    pub gaps: Vec<f64>,
    pub potential: f64,
    pub committee_correct: f64,
    pub constant: f64,
    pub thompson_epsilon: f64,
    pub horizon: u64,
    pub expert_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaBound {
    pub params: BoundParams,
    pub bound: f64,
}

pub const DEFAULT_THOMPSON_EPSILON: f64 = 0.2;

/// Leading constant of the bound for index policies sharing the common form.
pub fn policy_constant(kind: PolicyKind, thompson_epsilon: f64) -> f64 {
    match kind {
        PolicyKind::Ucb1 => 10.0,
        PolicyKind::KlUcb | PolicyKind::Imed => 0.5,
        PolicyKind::Thompson => 1.0 + thompson_epsilon,
        // MOSS has its own expression; the constant is reported for reference.
        PolicyKind::Moss => 23.0,
    }
}

/// Regret bound for a leader chosen outside a pinned peer committee.
///
/// The Thompson additive term of order `M / eps^2` is taken with unit constant
/// and normalized by the horizon like the rest of the bound.
pub fn lemma_bound(
    profile: &CompetenceProfile,
    committee: &[usize],
    kind: PolicyKind,
    horizon: u64,
    thompson_epsilon: f64,
) -> Result<LemmaBound> {
    let experts = profile.expert_count();
    if let Some(&index) = committee.iter().find(|&&i| i >= experts) {
        return Err(BeeError::ExpertOutOfRange { index, experts });
    }
    let ps: Vec<f64> = committee.iter().map(|&i| profile.get(i)).collect();
    let p_c = committee_correct_prob(&ps)?;
    if p_c <= 0.5 {
        return Err(BeeError::IncompetentCommittee(p_c));
    }
    let factor = 2.0 * p_c - 1.0;
    let phi = potential(profile, committee, horizon);
    let gaps = gaps(profile);
    let constant = policy_constant(kind, thompson_epsilon);
    let t = horizon as f64;
    let m = experts as f64;
    let bound = match kind {
        PolicyKind::Moss => {
            let sum: f64 = gaps
                .iter()
                .enumerate()
                .filter(|(i, g)| !committee.contains(i) && **g > 0.0)
                .map(|(_, &g)| (t * (factor * g).powi(2) / m).ln().max(1.0) / g)
                .sum();
            23.0 * m / t * sum / factor
        }
        PolicyKind::Thompson => constant * phi / factor + m / (thompson_epsilon.powi(2) * t),
        _ => constant * phi / factor,
    };
    Ok(LemmaBound {
        params: BoundParams {
            gaps,
            potential: phi,
            committee_correct: p_c,
            constant,
            thompson_epsilon,
            horizon,
            expert_count: experts,
        },
        bound,
    })
}
