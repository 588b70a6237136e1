//! Blind exploration-exploitation over stochastic experts.
//!
//! Experts give binary opinions on tasks whose labels are never revealed. Each
//! consulted expert is rewarded for agreeing with the majority of the other
//! consulted experts; bandit index policies (UCB1, KL-UCB, IMED, MOSS,
//! Thompson sampling) run on those agreement rewards to find the most reliable
//! experts, and SWARM additionally aggregates the consulted opinions with
//! weights learned from the same rewards.
//!
//! - [`world`]: hidden task process and opinion generator
//! - [`committee`]: exact majority-vote and pseudo-competence analytics
//! - [`policy`]: index statistics and ranking
//! - [`engine`]: BEE / SWARM / pinned-committee runners
//! - [`regret`]: regret metrics, oracle baselines, regret bounds
//! - [`harness`]: experiment configuration, sweeps and CSV output

pub mod committee;
pub mod engine;
pub mod error;
pub mod harness;
pub mod policy;
pub mod regret;
pub mod seed;
pub mod world;

pub use committee::{
    committee_correct_prob, leave_one_out_pseudo, majority_vote, ordering_preserved, pseudo_competence_exact,
    pseudo_gap, Committee, OrderingCheck,
};
pub use engine::{lnb_aggregate, run_bee, run_fixed_committee, run_swarm, RoundOutcome, RunMode, RunTrace};
pub use error::{BeeError, Result};
pub use policy::{ExpertStats, KlUcbVariant, PolicyKind, PolicySpec};
pub use regret::{lemma_bound, oracle_committee_accuracy, RegretReport};
pub use seed::{Stream, WorldSeed};
pub use world::{build_world, CompetenceProfile, TaskRecord, Vote, World};
