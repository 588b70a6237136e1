//! Index statistics computed from agreement counts.
//!
//! Every policy turns an expert's agreement record into a score; experts are
//! consulted in order of that score (largest first, smallest first for IMED).

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{BeeError, Result};

pub const PRIOR_ALPHA: f64 = 1.0;
pub const PRIOR_BETA: f64 = 1.0;
/// Upper end of the KL-UCB search interval.
pub const KLUCB_CEILING: f64 = 1.0 - 1e-12;
const KLUCB_MAX_ITERS: usize = 100;
const KLUCB_RESIDUAL: f64 = 1e-8;

/// Agreement record of one expert.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpertStats {
    pub consults: u64,
    pub agreements: u64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for ExpertStats {
    fn default() -> Self {
        Self::with_prior(PRIOR_ALPHA, PRIOR_BETA)
    }
}

impl ExpertStats {
    pub fn with_prior(alpha: f64, beta: f64) -> Self {
        Self { consults: 0, agreements: 0, alpha, beta }
    }

    /// Empirical pseudo competence, `None` before the first consultation.
    pub fn estimate(&self) -> Option<f64> {
        (self.consults > 0).then(|| self.agreements as f64 / self.consults as f64)
    }

    fn checked(&self, expert: usize) -> Result<(f64, f64)> {
        match self.estimate() {
            Some(p) => Ok((p, self.consults as f64)),
            None => Err(BeeError::Uninitialized(expert)),
        }
    }
}

/// Records one agreement reward (`true` for agreement).
pub fn posterior_update(stats: &mut ExpertStats, reward: bool) {
    let r = u64::from(reward);
    stats.consults += 1;
    stats.agreements += r;
    stats.alpha += r as f64;
    stats.beta += (1 - r) as f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PolicyKind {
    #[serde(rename = "ucb1")]
    Ucb1,
    #[serde(rename = "kl-ucb")]
    KlUcb,
    #[serde(rename = "imed")]
    Imed,
    #[serde(rename = "moss")]
    Moss,
    #[serde(rename = "thompson")]
    Thompson,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Ucb1,
        PolicyKind::KlUcb,
        PolicyKind::Imed,
        PolicyKind::Moss,
        PolicyKind::Thompson,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Ucb1 => "ucb1",
            PolicyKind::KlUcb => "kl-ucb",
            PolicyKind::Imed => "imed",
            PolicyKind::Moss => "moss",
            PolicyKind::Thompson => "thompson",
        }
    }

    /// IMED consults the experts with the smallest index.
    pub fn selects_min(self) -> bool {
        self == PolicyKind::Imed
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ucb1" | "ucb" => Ok(PolicyKind::Ucb1),
            "kl-ucb" | "klucb" | "kl-ucb+" | "klucb+" => Ok(PolicyKind::KlUcb),
            "imed" => Ok(PolicyKind::Imed),
            "moss" => Ok(PolicyKind::Moss),
            "thompson" | "ts" => Ok(PolicyKind::Thompson),
            other => Err(format!("unknown policy `{other}`")),
        }
    }
}

/// Exploration budget used by KL-UCB.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KlUcbVariant {
    /// `ln(t / T_i) + c ln ln(t / T_i)`
    #[default]
    Plus,
    /// `ln t + c ln ln t`
    Classic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub horizon: Option<u64>,
    pub expert_count: Option<usize>,
    pub klucb_variant: KlUcbVariant,
    pub klucb_c: f64,
    pub klucb_tolerance: f64,
}

impl PolicySpec {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            horizon: None,
            expert_count: None,
            klucb_variant: KlUcbVariant::Plus,
            klucb_c: 0.0,
            klucb_tolerance: 1e-9,
        }
    }

    pub fn with_horizon(mut self, horizon: u64, expert_count: usize) -> Self {
        self.horizon = Some(horizon);
        self.expert_count = Some(expert_count);
        self
    }

    pub fn with_klucb(mut self, variant: KlUcbVariant, c: f64) -> Self {
        self.klucb_variant = variant;
        self.klucb_c = c;
        self
    }
}

/// Bernoulli Kullback-Leibler divergence `d(p, q)` with `0 ln 0 = 0`.
pub fn kl_divergence(p: f64, q: f64) -> f64 {
    if p == q {
        return 0.0;
    }
    if q <= 0.0 || q >= 1.0 {
        return f64::INFINITY;
    }
    let mut d = 0.0;
    if p > 0.0 {
        d += p * (p / q).ln();
    }
    if p < 1.0 {
        d += (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    }
    d.max(0.0)
}

/// Largest `q` in `[estimate, 1)` with `consults * d(estimate, q) <= budget`.
///
/// `q -> consults * d(estimate, q)` is convex and increasing on `[estimate, 1)`,
/// so Newton steps started right of the root (at the Pinsker cap
/// `estimate + sqrt(budget / 2 consults)`) decrease monotonically onto it. The
/// loop stops once a step is below `tolerance` and the residual is negligible.
pub fn klucb_upper(estimate: f64, consults: f64, budget: f64, tolerance: f64) -> f64 {
    if budget <= 0.0 || estimate >= KLUCB_CEILING {
        return estimate;
    }
    let excess = |q: f64| consults * kl_divergence(estimate, q) - budget;
    let mut q = (estimate + (budget / (2.0 * consults)).sqrt()).min(KLUCB_CEILING);
    let mut f = excess(q);
    if f <= 0.0 {
        return q;
    }
    for _ in 0..KLUCB_MAX_ITERS {
        let slope = consults * (q - estimate) / (q * (1.0 - q));
        let step = f / slope;
        let next = q - step;
        // round-off guard; convexity keeps exact iterates right of the root
        q = if next > estimate { next } else { 0.5 * (estimate + q) };
        f = excess(q);
        if step.abs() <= tolerance && f.abs() <= KLUCB_RESIDUAL {
            break;
        }
    }
    q
}

fn positive_log_log(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

/// KL-UCB exploration budget for an expert consulted `consults` times by round `t`.
pub fn klucb_budget(t: u64, consults: f64, variant: KlUcbVariant, c: f64) -> f64 {
    let base = match variant {
        KlUcbVariant::Plus => (t as f64 / consults).ln(),
        KlUcbVariant::Classic => (t as f64).ln(),
    };
    let extra = if c == 0.0 { 0.0 } else { c * positive_log_log(base) };
    (base + extra).max(0.0)
}

/// UCB1 score from an estimate and a consult count.
pub fn ucb1_value(estimate: f64, consults: f64, t: u64) -> f64 {
    estimate + (2.0 * (t as f64).ln() / consults).sqrt()
}

pub fn klucb_value(estimate: f64, consults: f64, t: u64, spec: &PolicySpec) -> f64 {
    let budget = klucb_budget(t, consults, spec.klucb_variant, spec.klucb_c);
    klucb_upper(estimate, consults, budget, spec.klucb_tolerance)
}

/// IMED score; `max_estimate` is the largest estimate among the ranked experts.
pub fn imed_value(estimate: f64, consults: f64, max_estimate: f64) -> f64 {
    let divergence = if estimate >= max_estimate { 0.0 } else { consults * kl_divergence(estimate, max_estimate) };
    divergence + consults.ln()
}

pub fn moss_value(estimate: f64, consults: f64, horizon: u64, experts: usize) -> f64 {
    let explore = (horizon as f64 / (experts as f64 * consults)).ln().max(0.0);
    estimate + (explore / consults).sqrt()
}

pub fn ucb1_index(stats: &ExpertStats, t: u64) -> Result<f64> {
    let (p, n) = stats.checked(0)?;
    Ok(ucb1_value(p, n, t))
}

pub fn klucb_index(stats: &ExpertStats, t: u64, spec: &PolicySpec) -> Result<f64> {
    let (p, n) = stats.checked(0)?;
    Ok(klucb_value(p, n, t, spec))
}

pub fn imed_index(stats: &ExpertStats, max_estimate: f64) -> Result<f64> {
    let (p, n) = stats.checked(0)?;
    Ok(imed_value(p, n, max_estimate))
}

pub fn moss_index(stats: &ExpertStats, spec: &PolicySpec) -> Result<f64> {
    let (horizon, experts) = match (spec.horizon, spec.expert_count) {
        (Some(h), Some(m)) => (h, m),
        _ => return Err(BeeError::MossUnconfigured),
    };
    let (p, n) = stats.checked(0)?;
    Ok(moss_value(p, n, horizon, experts))
}

/// One draw from `Beta(alpha, beta)` as a ratio of gamma variates.
pub fn thompson_index<R: Rng + ?Sized>(stats: &ExpertStats, rng: &mut R) -> f64 {
    let x = Gamma::new(stats.alpha, 1.0).expect("alpha > 0").sample(rng);
    let y = Gamma::new(stats.beta, 1.0).expect("beta > 0").sample(rng);
    if x + y == 0.0 {
        // both underflowed; only reachable for tiny shape parameters
        return if rng.random::<bool>() { 1.0 } else { 0.0 };
    }
    x / (x + y)
}

/// Indices of `candidates` in candidate order.
pub fn compute_indices<R: Rng + ?Sized>(
    stats: &[ExpertStats],
    candidates: &[usize],
    spec: &PolicySpec,
    t: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    for &i in candidates {
        if stats[i].consults == 0 {
            return Err(BeeError::Uninitialized(i));
        }
    }
    let max_estimate = candidates
        .iter()
        .filter_map(|&i| stats[i].estimate())
        .fold(f64::NEG_INFINITY, f64::max);
    candidates
        .iter()
        .map(|&i| {
            let s = &stats[i];
            match spec.kind {
                PolicyKind::Ucb1 => ucb1_index(s, t),
                PolicyKind::KlUcb => klucb_index(s, t, spec),
                PolicyKind::Imed => imed_index(s, max_estimate),
                PolicyKind::Moss => moss_index(s, spec),
                PolicyKind::Thompson => Ok(thompson_index(s, rng)),
            }
        })
        .collect()
}

/// Experts to consult this round, best first; `leader` is `committee[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub committee: Vec<usize>,
    pub leader: usize,
}

// total order that still treats -0.0 and 0.0 as a tie
fn score_cmp(a: f64, b: f64) -> Ordering {
    if a == b {
        Ordering::Equal
    } else {
        a.total_cmp(&b)
    }
}

/// Picks the `m` best candidates by `indices`. Ties go to the lower expert index.
pub fn select_by_index(indices: &[f64], candidates: &[usize], m: usize, selects_min: bool) -> Selection {
    let mut order: Vec<usize> = (0..candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let by_index = if selects_min {
            score_cmp(indices[a], indices[b])
        } else {
            score_cmp(indices[b], indices[a])
        };
        match by_index {
            Ordering::Equal => candidates[a].cmp(&candidates[b]),
            other => other,
        }
    });
    let committee: Vec<usize> = order.iter().take(m).map(|&k| candidates[k]).collect();
    Selection { leader: committee[0], committee }
}

/// Ranks `candidates` under `spec` at round `t` and returns the top `m`.
pub fn rank_among<R: Rng + ?Sized>(
    stats: &[ExpertStats],
    candidates: &[usize],
    spec: &PolicySpec,
    t: u64,
    m: usize,
    rng: &mut R,
) -> Result<Selection> {
    if m == 0 || m > candidates.len() {
        return Err(BeeError::InvalidCommitteeSize { m, experts: candidates.len() });
    }
    let indices = compute_indices(stats, candidates, spec, t, rng)?;
    Ok(select_by_index(&indices, candidates, m, spec.kind.selects_min()))
}

pub fn rank_for_consultation<R: Rng + ?Sized>(
    stats: &[ExpertStats],
    spec: &PolicySpec,
    t: u64,
    m: usize,
    rng: &mut R,
) -> Result<Selection> {
    let all: Vec<usize> = (0..stats.len()).collect();
    rank_among(stats, &all, spec, t, m, rng)
}
