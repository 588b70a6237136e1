use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::policy::{KlUcbVariant, PolicyKind};
use crate::regret::DEFAULT_THOMPSON_EPSILON;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid `{field}`: {message}")]
    Invalid { field: &'static str, message: String },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { field, message: message.into() }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Bee,
    Swarm,
    FixedCommitteeLemma,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Bee => "bee",
            Mode::Swarm => "swarm",
            Mode::FixedCommitteeLemma => "fixed-committee-lemma",
        }
    }
}

/// Population for the pinned-committee validation: `committee_size` peers at
/// `committee_competence`, then `candidates` experts whose best member sits
/// at `best_competence` and whose others trail it by gaps spread evenly over
/// `[gap_low, gap_high]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LemmaConfig {
    pub committee_size: usize,
    pub committee_competence: f64,
    pub candidates: usize,
    pub best_competence: f64,
    pub gap_low: f64,
    pub gap_high: f64,
}

impl Default for LemmaConfig {
    fn default() -> Self {
        Self {
            committee_size: 5,
            committee_competence: 0.7,
            candidates: 10,
            best_competence: 0.8,
            gap_low: 0.05,
            gap_high: 0.2,
        }
    }
}

impl LemmaConfig {
    /// Competences of peers (first `committee_size`) followed by candidates.
    pub fn competences(&self) -> Vec<f64> {
        let mut ps = vec![self.committee_competence; self.committee_size];
        ps.push(self.best_competence);
        let others = self.candidates - 1;
        for k in 0..others {
            let gap = if others == 1 {
                self.gap_low
            } else {
                self.gap_low + (self.gap_high - self.gap_low) * k as f64 / (others - 1) as f64
            };
            ps.push(self.best_competence - gap);
        }
        ps
    }

    pub fn committee(&self) -> Vec<usize> {
        (0..self.committee_size).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    pub expert_count: usize,
    pub horizon: u64,
    pub competence_low: f64,
    pub competence_high: f64,
    pub m_values: Vec<usize>,
    pub policies: Vec<PolicyKind>,
    pub replications: u64,
    pub master_seed: u64,
    pub output_directory: PathBuf,
    pub klucb_variant: KlUcbVariant,
    pub klucb_c: f64,
    pub thompson_epsilon: f64,
    pub fixed_profile: bool,
    pub full_trace: bool,
    /// 0 means one worker per available core.
    pub workers: usize,
    pub lemma: LemmaConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            mode: Mode::Bee,
            expert_count: 100,
            horizon: 100_000,
            competence_low: 0.5,
            competence_high: 0.75,
            m_values: (1..=12).map(|k| 2 * k).collect(),
            policies: PolicyKind::ALL.to_vec(),
            replications: 20,
            master_seed: 1,
            output_directory: PathBuf::from("results"),
            klucb_variant: KlUcbVariant::Plus,
            klucb_c: 0.0,
            thompson_epsilon: DEFAULT_THOMPSON_EPSILON,
            fixed_profile: false,
            full_trace: false,
            workers: 0,
            lemma: LemmaConfig::default(),
        }
    }
}

/// Command-line values that take precedence over the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mode: Option<Mode>,
    pub expert_count: Option<usize>,
    pub horizon: Option<u64>,
    pub competence_low: Option<f64>,
    pub competence_high: Option<f64>,
    pub m_values: Option<Vec<usize>>,
    pub policies: Option<Vec<PolicyKind>>,
    pub replications: Option<u64>,
    pub master_seed: Option<u64>,
    pub output_directory: Option<PathBuf>,
    pub fixed_profile: bool,
    pub full_trace: bool,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        if text.trim().is_empty() {
            return Ok(Self::default());
        }
        serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn apply(&mut self, o: &Overrides) {
        macro_rules! take {
            ($($field:ident),*) => {$(
                if let Some(v) = &o.$field {
                    self.$field = v.clone();
                }
            )*};
        }
        take!(mode, expert_count, horizon, competence_low, competence_high, m_values, policies, replications, master_seed, output_directory, workers);
        self.fixed_profile |= o.fixed_profile;
        self.full_trace |= o.full_trace;
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.expert_count < 2 {
            return Err(invalid("expert_count", "need at least two experts"));
        }
        if self.horizon < 1 {
            return Err(invalid("horizon", "must be at least 1"));
        }
        let (lo, hi) = (self.competence_low, self.competence_high);
        if !(0.5 <= lo && lo < hi && hi <= 1.0) {
            return Err(invalid("competence_low", format!("need 0.5 <= low < high <= 1, got [{lo}, {hi}]")));
        }
        if self.replications < 1 {
            return Err(invalid("replications", "must be at least 1"));
        }
        if self.policies.is_empty() {
            return Err(invalid("policies", "at least one policy is required"));
        }
        if self.thompson_epsilon.is_nan() || self.thompson_epsilon <= 0.0 {
            return Err(invalid("thompson_epsilon", "must be positive"));
        }
        if self.klucb_c.is_nan() || self.klucb_c < 0.0 {
            return Err(invalid("klucb_c", "must be non-negative"));
        }
        match self.mode {
            Mode::Bee | Mode::Swarm => {
                if self.m_values.is_empty() {
                    return Err(invalid("m_values", "at least one committee size is required"));
                }
                if let Some(m) = self.m_values.iter().find(|&&m| m < 2 || m > self.expert_count) {
                    return Err(invalid(
                        "m_values",
                        format!("committee size {m} outside [2, {}]", self.expert_count),
                    ));
                }
            }
            Mode::FixedCommitteeLemma => self.validate_lemma()?,
        }
        Ok(())
    }

    fn validate_lemma(&self) -> Result<(), ConfigError> {
        let l = &self.lemma;
        if l.committee_size < 1 {
            return Err(invalid("lemma.committee_size", "must be at least 1"));
        }
        if l.candidates < 2 {
            return Err(invalid("lemma.candidates", "need at least two candidates"));
        }
        if !(0.0 < l.committee_competence && l.committee_competence < 1.0) {
            return Err(invalid("lemma.committee_competence", "must lie in (0, 1)"));
        }
        if !(0.0 < l.gap_low && l.gap_low <= l.gap_high) {
            return Err(invalid("lemma.gap_low", "need 0 < gap_low <= gap_high"));
        }
        if !(l.best_competence < 1.0 && l.best_competence - l.gap_high > 0.0) {
            return Err(invalid("lemma.best_competence", "candidate competences must stay inside (0, 1)"));
        }
        Ok(())
    }
}

/// Loads `path` (if any), applies `overrides`, and validates the result.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let mut config = match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| ConfigError::Io { path: p.to_path_buf(), source })?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig::default(),
    };
    config.apply(overrides);
    config.validate()?;
    Ok(config)
}
