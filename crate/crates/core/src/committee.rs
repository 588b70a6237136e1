//! Exact analytics of majority votes and pseudo competences.
//!
//! The pseudo competence of an expert is the probability that it agrees with the
//! majority vote of a peer committee. For a committee that does not contain the
//! expert it equals `p_i * p_C + (1 - p_i) * (1 - p_C)`, where `p_C` is the
//! probability that the committee's majority is correct with ties settled by a
//! fair coin.

use rand::Rng;

use crate::error::{BeeError, Result};
use crate::world::{CompetenceProfile, Vote};

/// Distance from 1/2 below which a committee is treated as uninformative.
pub const INDETERMINATE_TOLERANCE: f64 = 1e-12;

/// Where a pseudo-competence value came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PseudoBasis {
    ExactFormula,
    LeaveOneOutExact,
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoCompetence {
    pub value: f64,
    pub basis: PseudoBasis,
}

/// A set of distinct experts together with their (true) competences.
#[derive(Debug, Clone, PartialEq)]
pub struct Committee {
    members: Vec<usize>,
    competences: Vec<f64>,
}

impl Committee {
    pub fn new(members: Vec<usize>, competences: Vec<f64>) -> Result<Self> {
        if members.is_empty() {
            return Err(BeeError::EmptyCommittee);
        }
        assert_eq!(members.len(), competences.len(), "members and competences must align");
        for (k, &m) in members.iter().enumerate() {
            if members[..k].contains(&m) {
                return Err(BeeError::DuplicateMember(m));
            }
        }
        for (index, &value) in competences.iter().enumerate() {
            if !(value > 0.0 && value < 1.0) {
                return Err(BeeError::CompetenceOutOfRange { index, value });
            }
        }
        Ok(Self { members, competences })
    }

    pub fn from_profile(profile: &CompetenceProfile, members: &[usize]) -> Result<Self> {
        let experts = profile.expert_count();
        if let Some(&index) = members.iter().find(|&&i| i >= experts) {
            return Err(BeeError::ExpertOutOfRange { index, experts });
        }
        let competences = members.iter().map(|&i| profile.get(i)).collect();
        Self::new(members.to_vec(), competences)
    }

    /// Anonymous committee indexed `0..n`.
    pub fn from_competences(competences: &[f64]) -> Result<Self> {
        Self::new((0..competences.len()).collect(), competences.to_vec())
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn competences(&self) -> &[f64] {
        &self.competences
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, expert: usize) -> bool {
        self.members.contains(&expert)
    }

    pub fn correct_prob(&self) -> f64 {
        correct_prob_unchecked(&self.competences)
    }

    /// The committee with `expert` removed, or an error if it is absent.
    pub fn without(&self, expert: usize) -> Result<Committee> {
        let pos = self
            .members
            .iter()
            .position(|&m| m == expert)
            .ok_or(BeeError::NotAMember(expert))?;
        let mut members = self.members.clone();
        let mut competences = self.competences.clone();
        members.remove(pos);
        competences.remove(pos);
        Committee::new(members, competences)
    }
}

/// Sign of the opinion sum; an exact tie is settled by one fair coin from `tie_break`.
pub fn majority_vote<R: Rng + ?Sized>(opinions: &[Vote], tie_break: &mut R) -> Result<Vote> {
    if opinions.is_empty() {
        return Err(BeeError::EmptyVote);
    }
    let sum: i64 = opinions.iter().map(|&o| i64::from(o)).sum();
    Ok(match sum.signum() {
        1 => 1,
        -1 => -1,
        _ => coin(tie_break),
    })
}

pub(crate) fn coin<R: Rng + ?Sized>(rng: &mut R) -> Vote {
    if rng.random::<bool>() {
        1
    } else {
        -1
    }
}

/// Distribution of the number of correct members: entry `k` is `P(K = k)`.
pub fn correct_count_distribution(competences: &[f64]) -> Vec<f64> {
    let mut dist = vec![0.0; competences.len() + 1];
    dist[0] = 1.0;
    for (n, &p) in competences.iter().enumerate() {
        for k in (1..=n + 1).rev() {
            dist[k] = dist[k] * (1.0 - p) + dist[k - 1] * p;
        }
        dist[0] *= 1.0 - p;
    }
    dist
}

fn correct_prob_unchecked(competences: &[f64]) -> f64 {
    let n = competences.len();
    let dist = correct_count_distribution(competences);
    let mut total = 0.0;
    for (k, &mass) in dist.iter().enumerate() {
        if 2 * k > n {
            total += mass;
        } else if 2 * k == n {
            total += 0.5 * mass;
        }
    }
    total.clamp(0.0, 1.0)
}

/// Probability that the majority vote of independent members with the given
/// competences equals the label, ties counted one half.
pub fn committee_correct_prob(competences: &[f64]) -> Result<f64> {
    if competences.is_empty() {
        return Err(BeeError::EmptyCommittee);
    }
    for (index, &value) in competences.iter().enumerate() {
        if !(value > 0.0 && value < 1.0) {
            return Err(BeeError::CompetenceOutOfRange { index, value });
        }
    }
    Ok(correct_prob_unchecked(competences))
}

pub fn pseudo_competence_exact(p_i: f64, p_committee: f64) -> f64 {
    p_i * p_committee + (1.0 - p_i) * (1.0 - p_committee)
}

/// Difference of two pseudo competences measured against the same committee.
pub fn pseudo_gap(p_i: f64, p_j: f64, p_committee: f64) -> f64 {
    (2.0 * p_committee - 1.0) * (p_i - p_j)
}

/// Pseudo competence of a committee member against the rest of the committee.
pub fn leave_one_out_pseudo(expert: usize, committee: &Committee) -> Result<PseudoCompetence> {
    let pos = committee
        .members
        .iter()
        .position(|&m| m == expert)
        .ok_or(BeeError::NotAMember(expert))?;
    if committee.len() < 2 {
        return Err(BeeError::NoPeers);
    }
    let peers = committee.without(expert)?;
    Ok(PseudoCompetence {
        value: pseudo_competence_exact(committee.competences[pos], peers.correct_prob()),
        basis: PseudoBasis::LeaveOneOutExact,
    })
}

/// Pseudo competences of every expert outside `committee`, in expert order.
pub fn exact_pseudo_competences(profile: &CompetenceProfile, committee: &Committee) -> Vec<(usize, PseudoCompetence)> {
    let p_c = committee.correct_prob();
    (0..profile.expert_count())
        .filter(|i| !committee.contains(*i))
        .map(|i| {
            (
                i,
                PseudoCompetence {
                    value: pseudo_competence_exact(profile.get(i), p_c),
                    basis: PseudoBasis::ExactFormula,
                },
            )
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderingCheck {
    Preserved,
    Violated,
    /// The committee is a coin flip, so every pseudo competence collapses to 1/2.
    Indeterminate,
}

fn pairwise_signs_agree(true_values: &[f64], pseudo_values: &[f64]) -> bool {
    let n = true_values.len();
    for a in 0..n {
        for b in a + 1..n {
            let truth = (true_values[a] - true_values[b]).partial_cmp(&0.0);
            let pseudo = (pseudo_values[a] - pseudo_values[b]).partial_cmp(&0.0);
            if truth != pseudo {
                return false;
            }
        }
    }
    true
}

/// Checks that pseudo competences measured against `committee` order the
/// experts outside it the same way their true competences do.
pub fn ordering_preserved(profile: &CompetenceProfile, committee: &Committee) -> OrderingCheck {
    let p_c = committee.correct_prob();
    if (p_c - 0.5).abs() <= INDETERMINATE_TOLERANCE {
        return OrderingCheck::Indeterminate;
    }
    let outside = exact_pseudo_competences(profile, committee);
    let truth: Vec<f64> = outside.iter().map(|(i, _)| profile.get(*i)).collect();
    let pseudo: Vec<f64> = outside.iter().map(|(_, pc)| pc.value).collect();
    if pairwise_signs_agree(&truth, &pseudo) {
        OrderingCheck::Preserved
    } else {
        OrderingCheck::Violated
    }
}

/// Same check for committee members, each measured against the others.
///
/// Unlike the out-of-committee case this is not guaranteed; callers verify it
/// per instance.
pub fn leave_one_out_ordering(committee: &Committee) -> Result<OrderingCheck> {
    let pseudo = committee
        .members
        .iter()
        .map(|&m| leave_one_out_pseudo(m, committee).map(|pc| pc.value))
        .collect::<Result<Vec<_>>>()?;
    if pseudo.iter().all(|v| (v - 0.5).abs() <= INDETERMINATE_TOLERANCE) {
        return Ok(OrderingCheck::Indeterminate);
    }
    Ok(if pairwise_signs_agree(&committee.competences, &pseudo) {
        OrderingCheck::Preserved
    } else {
        OrderingCheck::Violated
    })
}
