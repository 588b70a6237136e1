use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BeeError {
    #[error("competence profile must hold at least two experts, got {0}")]
    TooFewExperts(usize),
    #[error("competence of expert {index} is {value}, must lie strictly inside (0, 1)")]
    CompetenceOutOfRange { index: usize, value: f64 },
    #[error("expert index {index} out of range for {experts} experts")]
    ExpertOutOfRange { index: usize, experts: usize },
    #[error("committee is empty")]
    EmptyCommittee,
    #[error("expert {0} appears more than once in the committee")]
    DuplicateMember(usize),
    #[error("expert {0} is not a committee member")]
    NotAMember(usize),
    #[error("agreement reward needs at least one peer")]
    NoPeers,
    #[error("cannot vote over an empty set of opinions")]
    EmptyVote,
    #[error("expert {0} has never been consulted")]
    Uninitialized(usize),
    #[error("MOSS needs both horizon and expert count")]
    MossUnconfigured,
    #[error("committee size {m} is invalid for {experts} experts")]
    InvalidCommitteeSize { m: usize, experts: usize },
    #[error("horizon must be at least 1")]
    InvalidHorizon,
    #[error("committee correctness {0} does not exceed 1/2")]
    IncompetentCommittee(f64),
    #[error("trace length {trace} does not match {expected}")]
    LengthMismatch { trace: usize, expected: usize },
    #[error("no candidate experts outside the pinned committee")]
    NoCandidates,
}

pub type Result<T> = std::result::Result<T, BeeError>;
