//! BEE and SWARM runners.
//!
//! Every round the policy ranks experts from their agreement records, the top
//! `m` are consulted, each consulted expert is rewarded for agreeing with the
//! majority of the others, and a decision is committed. BEE commits the
//! leader's opinion before updating; SWARM updates first and then commits a
//! weighted vote. The runners never look at labels or competences: those only
//! pass through to [`RoundOutcome`] for the metrics.

use log::warn;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::committee::{coin, majority_vote};
use crate::error::{BeeError, Result};
use crate::policy::{posterior_update, rank_among, ExpertStats, PolicySpec, Selection};
use crate::seed::{Stream, WorldSeed};
use crate::world::{TaskRecord, Vote, World};

/// Weighted sums closer to zero than this are treated as ties.
pub const AGGREGATE_TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Bee,
    Swarm,
    FixedCommittee,
}

impl RunMode {
    pub fn name(self) -> &'static str {
        match self {
            RunMode::Bee => "bee",
            RunMode::Swarm => "swarm",
            RunMode::FixedCommittee => "fixed-committee-lemma",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub round: u64,
    /// Consulted experts, ranked best first.
    pub committee: Vec<usize>,
    pub leader: usize,
    pub decision: Vote,
    /// Agreement rewards of the experts whose statistics were updated.
    pub rewards: Vec<(usize, bool)>,
    /// Oracle channel: hidden label.
    pub label: Vote,
    /// Oracle channel: whether the truly best expert was right this round.
    pub best_expert_correct: bool,
}

impl RoundOutcome {
    pub fn decision_correct(&self) -> bool {
        self.decision == self.label
    }
}

#[derive(Debug, Clone)]
pub struct RunTrace {
    pub mode: RunMode,
    pub policy: PolicySpec,
    pub committee_size: usize,
    pub seed: WorldSeed,
    pub rounds: Vec<RoundOutcome>,
    pub stats: Vec<ExpertStats>,
}

impl RunTrace {
    pub fn horizon(&self) -> usize {
        self.rounds.len()
    }
}

/// Decision rule for SWARM.
#[derive(Debug, Clone, PartialEq)]
pub enum Weighting {
    /// Weights from the running agreement estimates.
    Estimated,
    /// Fixed per-expert reliabilities (indexed by expert), e.g. true competences.
    Fixed(Vec<f64>),
}

/// Test and baseline knobs; the default is the plain algorithm.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    /// Consult this committee every round instead of ranking.
    pub pinned_committee: Option<Vec<usize>>,
    pub weighting: Weighting,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self { pinned_committee: None, weighting: Weighting::Estimated }
    }
}

/// 1 iff the member at `position` agrees with the majority of the others.
pub fn agreement_reward<R: Rng + ?Sized>(position: usize, opinions: &[Vote], tie_break: &mut R) -> Result<bool> {
    if position >= opinions.len() {
        return Err(BeeError::NotAMember(position));
    }
    if opinions.len() < 2 {
        return Err(BeeError::NoPeers);
    }
    let peers: Vec<Vote> = opinions
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != position)
        .map(|(_, &o)| o)
        .collect();
    Ok(opinions[position] == majority_vote(&peers, tie_break)?)
}

/// Leave-one-out agreement rewards for every member, in order.
pub fn agreement_rewards<R: Rng + ?Sized>(opinions: &[Vote], tie_break: &mut R) -> Result<Vec<bool>> {
    if opinions.len() < 2 {
        return Err(BeeError::NoPeers);
    }
    let total: i64 = opinions.iter().map(|&o| i64::from(o)).sum();
    Ok(opinions
        .iter()
        .map(|&o| {
            let peer_vote = match (total - i64::from(o)).signum() {
                1 => 1,
                -1 => -1,
                _ => coin(tie_break),
            };
            o == peer_vote
        })
        .collect())
}

/// Sign of `sum X_i (w_i - 1/2)`; a zero sum is settled by a fair coin.
pub fn lnb_aggregate<R: Rng + ?Sized>(opinions: &[Vote], reliabilities: &[f64], tie_break: &mut R) -> Vote {
    debug_assert_eq!(opinions.len(), reliabilities.len());
    let sum: f64 = opinions
        .iter()
        .zip(reliabilities)
        .map(|(&o, &w)| f64::from(o) * (w - 0.5))
        .sum();
    if sum > AGGREGATE_TIE_TOLERANCE {
        1
    } else if sum < -AGGREGATE_TIE_TOLERANCE {
        -1
    } else {
        coin(tie_break)
    }
}

struct Runner<'w> {
    world: &'w mut World,
    spec: PolicySpec,
    stats: Vec<ExpertStats>,
    tie_break: ChaCha8Rng,
    policy_rng: ChaCha8Rng,
}

impl<'w> Runner<'w> {
    fn new(world: &'w mut World, spec: &PolicySpec) -> Self {
        let seed = world.seed();
        Self {
            stats: vec![ExpertStats::default(); world.expert_count()],
            tie_break: seed.rng(Stream::TieBreak),
            policy_rng: seed.rng(Stream::Policy),
            spec: spec.clone(),
            world,
        }
    }

    fn reward_committee(&mut self, record: &TaskRecord) -> Result<Vec<(usize, bool)>> {
        let rewards = agreement_rewards(&record.opinions, &mut self.tie_break)?;
        Ok(record
            .committee
            .iter()
            .zip(rewards)
            .map(|(&i, r)| {
                posterior_update(&mut self.stats[i], r);
                (i, r)
            })
            .collect())
    }

    fn opinion_of(record: &TaskRecord, expert: usize) -> Vote {
        let pos = record.committee.iter().position(|&i| i == expert).expect("leader was consulted");
        record.opinions[pos]
    }

    fn outcome(record: TaskRecord, leader: usize, decision: Vote, rewards: Vec<(usize, bool)>) -> RoundOutcome {
        RoundOutcome {
            round: record.round,
            committee: record.committee,
            leader,
            decision,
            rewards,
            label: record.label,
            best_expert_correct: record.best_expert_correct,
        }
    }

    /// Round 1: everyone is consulted and rewarded against everyone else.
    fn initialize(&mut self, mode: RunMode) -> Result<RoundOutcome> {
        let everyone: Vec<usize> = (0..self.world.expert_count()).collect();
        let record = self.world.sample_round(&everyone)?;
        // No statistics exist yet, so the round-1 leader is a uniform pick.
        let leader = self.tie_break.random_range(0..everyone.len());
        let rewards = self.reward_committee(&record)?;
        let decision = match mode {
            RunMode::Swarm => majority_vote(&record.opinions, &mut self.tie_break)?,
            _ => record.opinions[leader],
        };
        Ok(Self::outcome(record, leader, decision, rewards))
    }

    fn select(&mut self, t: u64, m: usize, options: &RunOptions) -> Result<Selection> {
        match &options.pinned_committee {
            Some(pinned) => {
                let sel = rank_among(&self.stats, pinned, &self.spec, t, pinned.len(), &mut self.policy_rng)?;
                Ok(sel)
            }
            None => {
                let all: Vec<usize> = (0..self.stats.len()).collect();
                rank_among(&self.stats, &all, &self.spec, t, m, &mut self.policy_rng)
            }
        }
    }

    fn weights(&self, committee: &[usize], weighting: &Weighting) -> Vec<f64> {
        committee
            .iter()
            .map(|&i| match weighting {
                Weighting::Estimated => self.stats[i].estimate().unwrap_or(0.5),
                Weighting::Fixed(w) => w[i],
            })
            .collect()
    }

    fn run(mut self, mode: RunMode, m: usize, horizon: u64, options: &RunOptions) -> Result<RunTrace> {
        let mut rounds = Vec::with_capacity(horizon as usize);
        rounds.push(self.initialize(mode)?);
        for t in 2..=horizon {
            let sel = self.select(t, m, options)?;
            let record = self.world.sample_round(&sel.committee)?;
            let outcome = match mode {
                RunMode::Bee => {
                    let decision = Self::opinion_of(&record, sel.leader);
                    let rewards = self.reward_committee(&record)?;
                    Self::outcome(record, sel.leader, decision, rewards)
                }
                RunMode::Swarm => {
                    let rewards = self.reward_committee(&record)?;
                    let weights = self.weights(&record.committee, &options.weighting);
                    let decision = lnb_aggregate(&record.opinions, &weights, &mut self.tie_break);
                    Self::outcome(record, sel.leader, decision, rewards)
                }
                RunMode::FixedCommittee => unreachable!("fixed-committee runs use run_fixed_committee"),
            };
            rounds.push(outcome);
        }
        Ok(RunTrace {
            mode,
            policy: self.spec,
            committee_size: options.pinned_committee.as_ref().map_or(m, Vec::len),
            seed: self.world.seed(),
            rounds,
            stats: self.stats,
        })
    }
}

fn check_run(world: &World, m: usize, horizon: u64) -> Result<()> {
    let experts = world.expert_count();
    if m < 2 || m > experts {
        return Err(BeeError::InvalidCommitteeSize { m, experts });
    }
    if horizon < 1 {
        return Err(BeeError::InvalidHorizon);
    }
    if m % 2 == 1 {
        warn!("odd committee size {m}: every expert has an even number of peers, so rewards include tie coins");
    }
    Ok(())
}

fn check_pinned(world: &World, options: &RunOptions) -> Result<()> {
    if let Some(pinned) = &options.pinned_committee {
        for (k, &m) in pinned.iter().enumerate() {
            if pinned[..k].contains(&m) {
                return Err(BeeError::DuplicateMember(m));
            }
        }
        if let Some(&index) = pinned.iter().find(|&&i| i >= world.expert_count()) {
            return Err(BeeError::ExpertOutOfRange { index, experts: world.expert_count() });
        }
        if pinned.len() < 2 {
            return Err(BeeError::NoPeers);
        }
    }
    Ok(())
}

/// Runs BEE or SWARM with explicit options.
pub fn run_with(
    world: &mut World,
    spec: &PolicySpec,
    mode: RunMode,
    m: usize,
    horizon: u64,
    options: &RunOptions,
) -> Result<RunTrace> {
    match &options.pinned_committee {
        Some(p) => check_run(world, p.len(), horizon)?,
        None => check_run(world, m, horizon)?,
    }
    check_pinned(world, options)?;
    Runner::new(world, spec).run(mode, m, horizon, options)
}

/// BEE: commit to the opinion of the top-ranked consulted expert.
pub fn run_bee(world: &mut World, spec: &PolicySpec, m: usize, horizon: u64) -> Result<RunTrace> {
    run_with(world, spec, RunMode::Bee, m, horizon, &RunOptions::default())
}

/// SWARM: commit to the estimate-weighted vote of the consulted experts.
pub fn run_swarm(world: &mut World, spec: &PolicySpec, m: usize, horizon: u64) -> Result<RunTrace> {
    run_with(world, spec, RunMode::Swarm, m, horizon, &RunOptions::default())
}

/// Pinned peer committee: `peers` are consulted every round and only serve as
/// the reference vote; the policy picks one leader among the other experts,
/// who is rewarded for agreeing with the peers' majority.
pub fn run_fixed_committee(world: &mut World, spec: &PolicySpec, peers: &[usize], horizon: u64) -> Result<RunTrace> {
    if horizon < 1 {
        return Err(BeeError::InvalidHorizon);
    }
    check_pinned(world, &RunOptions { pinned_committee: Some(peers.to_vec()), ..RunOptions::default() })
        .or_else(|e| if e == BeeError::NoPeers { Ok(()) } else { Err(e) })?;
    let experts = world.expert_count();
    let candidates: Vec<usize> = (0..experts).filter(|i| !peers.contains(i)).collect();
    if candidates.is_empty() {
        return Err(BeeError::NoCandidates);
    }

    let mut runner = Runner::new(world, spec);
    let mut rounds = Vec::with_capacity(horizon as usize);
    let consult = |runner: &mut Runner<'_>, chosen: &[usize], leader: usize| -> Result<RoundOutcome> {
        let committee: Vec<usize> = peers.iter().chain(chosen).copied().collect();
        let record = runner.world.sample_round(&committee)?;
        let peer_vote = majority_vote(&record.opinions[..peers.len()], &mut runner.tie_break)?;
        let rewards = chosen
            .iter()
            .enumerate()
            .map(|(k, &i)| {
                let r = record.opinions[peers.len() + k] == peer_vote;
                posterior_update(&mut runner.stats[i], r);
                (i, r)
            })
            .collect();
        let decision = Runner::opinion_of(&record, leader);
        Ok(Runner::outcome(record, leader, decision, rewards))
    };

    let first_leader = candidates[runner.tie_break.random_range(0..candidates.len())];
    rounds.push(consult(&mut runner, &candidates, first_leader)?);
    for t in 2..=horizon {
        let sel = rank_among(&runner.stats, &candidates, &runner.spec, t, 1, &mut runner.policy_rng)?;
        rounds.push(consult(&mut runner, &[sel.leader], sel.leader)?);
    }
    Ok(RunTrace {
        mode: RunMode::FixedCommittee,
        policy: runner.spec,
        committee_size: peers.len(),
        seed: runner.world.seed(),
        rounds,
        stats: runner.stats,
    })
}
