//! Hidden task process and expert opinions.
//!
//! Tasks carry a uniform binary label in {-1, +1}, drawn independently per
//! round. Expert `i` reports the label with probability `p_i` and its negation
//! otherwise, independently of every other expert given the label. Opinions are
//! drawn lazily for consulted experts only; each expert's draw for round `t`
//! sits at a fixed position of its own stream, so the joint law and the realized
//! path do not depend on who else was consulted.

use rand::distr::{Distribution, Uniform};
use rand::{Rng, RngCore};
use rand_chacha::ChaCha8Rng;

use crate::error::{BeeError, Result};
use crate::seed::{Stream, WorldSeed};

/// A binary label or opinion, always `-1` or `+1`.
pub type Vote = i8;

/// Ground-truth expert reliabilities. Never handed to a policy.
#[derive(Debug, Clone, PartialEq)]
pub struct CompetenceProfile {
    competences: Vec<f64>,
}

impl CompetenceProfile {
    pub fn new(competences: Vec<f64>) -> Result<Self> {
        if competences.len() < 2 {
            return Err(BeeError::TooFewExperts(competences.len()));
        }
        for (index, &value) in competences.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(BeeError::CompetenceOutOfRange { index, value });
            }
        }
        Ok(Self { competences })
    }

    /// Draws `experts` competences uniformly from `[low, high)`.
    ///
    /// `high` may be 1; draws equal to an endpoint of (0, 1) are rejected by
    /// [`CompetenceProfile::new`], which has probability zero in practice.
    pub fn uniform<R: Rng + ?Sized>(experts: usize, low: f64, high: f64, rng: &mut R) -> Result<Self> {
        let dist = Uniform::new(low, high).map_err(|_| BeeError::CompetenceOutOfRange {
            index: 0,
            value: low,
        })?;
        Self::new((0..experts).map(|_| dist.sample(rng)).collect())
    }

    pub fn competences(&self) -> &[f64] {
        &self.competences
    }

    pub fn expert_count(&self) -> usize {
        self.competences.len()
    }

    pub fn get(&self, index: usize) -> f64 {
        self.competences[index]
    }

    pub fn best_expert(&self) -> usize {
        best_expert(self)
    }

    pub fn best_competence(&self) -> f64 {
        self.competences[self.best_expert()]
    }
}

/// Index of the most competent expert; ties go to the lowest index.
pub fn best_expert(profile: &CompetenceProfile) -> usize {
    let mut best = 0;
    for (i, &p) in profile.competences.iter().enumerate().skip(1) {
        if p > profile.competences[best] {
            best = i;
        }
    }
    best
}

/// One round as seen by an omniscient observer.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskRecord {
    pub round: u64,
    pub label: Vote,
    pub committee: Vec<usize>,
    /// Aligned with `committee`.
    pub opinions: Vec<Vote>,
    /// `correctness[k]` is true iff `opinions[k] == label`.
    pub correctness: Vec<bool>,
    /// Whether the truly best expert's opinion matched the label this round,
    /// sampled whether or not that expert was consulted.
    pub best_expert_correct: bool,
}

#[derive(Debug, Clone)]
pub struct World {
    profile: CompetenceProfile,
    seed: WorldSeed,
    best: usize,
    labels: ChaCha8Rng,
    experts: Vec<ChaCha8Rng>,
    round: u64,
}

pub fn build_world(profile: CompetenceProfile, seed: WorldSeed) -> World {
    World::new(profile, seed)
}

impl World {
    pub fn new(profile: CompetenceProfile, seed: WorldSeed) -> Self {
        let experts = (0..profile.expert_count())
            .map(|i| seed.rng(Stream::Expert(i)))
            .collect();
        Self {
            best: profile.best_expert(),
            labels: seed.rng(Stream::Labels),
            profile,
            seed,
            experts,
            round: 0,
        }
    }

    pub fn seed(&self) -> WorldSeed {
        self.seed
    }

    pub fn expert_count(&self) -> usize {
        self.profile.expert_count()
    }

    /// Rounds issued so far.
    pub fn rounds(&self) -> u64 {
        self.round
    }

    /// Oracle access to the true competences.
    pub fn profile(&self) -> &CompetenceProfile {
        &self.profile
    }

    /// Issues the next task and collects opinions from `committee`.
    pub fn sample_round(&mut self, committee: &[usize]) -> Result<TaskRecord> {
        if committee.is_empty() {
            return Err(BeeError::EmptyCommittee);
        }
        let experts = self.expert_count();
        if let Some(&index) = committee.iter().find(|&&i| i >= experts) {
            return Err(BeeError::ExpertOutOfRange { index, experts });
        }
        self.round += 1;
        let label: Vote = if self.labels.next_u32() & 1 == 1 { 1 } else { -1 };

        let mut opinions = Vec::with_capacity(committee.len());
        let mut correctness = Vec::with_capacity(committee.len());
        for &i in committee {
            let correct = self.expert_correct(i);
            correctness.push(correct);
            opinions.push(if correct { label } else { -label });
        }
        let best_expert_correct = self.expert_correct(self.best);

        Ok(TaskRecord {
            round: self.round,
            label,
            committee: committee.to_vec(),
            opinions,
            correctness,
            best_expert_correct,
        })
    }

    // Draw for the current round lives at word 2 * (round - 1) of the expert's
    // stream; repeated calls within a round return the same answer.
    fn expert_correct(&mut self, expert: usize) -> bool {
        let rng = &mut self.experts[expert];
        let pos = 2 * u128::from(self.round - 1);
        if rng.get_word_pos() != pos {
            rng.set_word_pos(pos);
        }
        let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        u < self.profile.competences[expert]
    }
}
