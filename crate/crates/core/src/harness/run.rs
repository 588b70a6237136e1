use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use thiserror::Error;

use super::config::{ConfigError, ExperimentConfig, Mode};
use super::output::{checkpoints, fmt_float, write_lines, LEMMA_HEADER, SUMMARY_HEADER, TRACE_HEADER};
use crate::committee::pseudo_gap;
use crate::engine::{run_bee, run_fixed_committee, run_swarm};
use crate::error::BeeError;
use crate::policy::{PolicyKind, PolicySpec};
use crate::regret::{bee_report, lemma_bound, oracle_committee_accuracy, swarm_report, OracleMethod, ReplicationStats};
use crate::seed::{Stream, WorldSeed};
use crate::world::{CompetenceProfile, World};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run failed: {0}")]
    Run(#[from] BeeError),
    #[error("output error: {0}")]
    Io(#[from] std::io::Error),
}

impl HarnessError {
    /// Process exit code: 2 for configuration problems, 3 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            _ => 3,
        }
    }
}

type Result<T> = std::result::Result<T, HarnessError>;

/// Competence profile used by replication `rep`.
pub fn profile_for(config: &ExperimentConfig, rep: u64) -> std::result::Result<CompetenceProfile, BeeError> {
    let rep = if config.fixed_profile { 0 } else { rep };
    let mut rng = WorldSeed::with_replication(config.master_seed, rep).rng(Stream::Profile);
    CompetenceProfile::uniform(config.expert_count, config.competence_low, config.competence_high, &mut rng)
}

fn policy_spec(config: &ExperimentConfig, kind: PolicyKind) -> PolicySpec {
    PolicySpec::new(kind)
        .with_horizon(config.horizon, config.expert_count)
        .with_klucb(config.klucb_variant, config.klucb_c)
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| HarnessError::Io(std::io::Error::other(e)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub mode: Mode,
    pub policy: PolicyKind,
    pub m: usize,
    pub replication: u64,
    pub round: u64,
    pub leader: usize,
    pub decision_correct: bool,
    pub cum_realized_regret: f64,
    pub cum_pseudo_regret: f64,
}

impl TraceRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.mode.name(),
            self.policy.name(),
            self.m,
            self.replication,
            self.round,
            self.leader,
            u8::from(self.decision_correct),
            fmt_float(self.cum_realized_regret),
            fmt_float(self.cum_pseudo_regret),
        )
    }
}

/// Aggregate over replications of one (policy, m) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub mode: Mode,
    pub policy: PolicyKind,
    pub m: usize,
    pub replications: u64,
    pub horizon: u64,
    pub experts: usize,
    pub realized: ReplicationStats,
    pub pseudo: ReplicationStats,
    /// Mean over replications of the per-run baseline.
    pub baseline: f64,
}

impl CellSummary {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.mode.name(),
            self.policy.name(),
            self.m,
            self.replications,
            self.horizon,
            self.experts,
            fmt_float(self.realized.mean),
            fmt_float(self.realized.std),
            fmt_float(self.pseudo.mean),
            fmt_float(self.pseudo.std),
            fmt_float(self.baseline),
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentOutput {
    pub summary: Vec<CellSummary>,
    pub traces: Vec<TraceRow>,
}

struct RunResult {
    realized: f64,
    pseudo: f64,
    baseline: f64,
    rows: Vec<TraceRow>,
}

fn run_cell(
    config: &ExperimentConfig,
    kind: PolicyKind,
    m: usize,
    rep: u64,
    baselines: &HashMap<(u64, usize), f64>,
) -> std::result::Result<RunResult, BeeError> {
    let profile = profile_for(config, rep)?;
    let spec = policy_spec(config, kind);
    let mut world = World::new(profile.clone(), WorldSeed::with_replication(config.master_seed, rep));
    let (trace, report) = match config.mode {
        Mode::Swarm => {
            let trace = run_swarm(&mut world, &spec, m, config.horizon)?;
            let baseline = baselines[&(baseline_key(config, rep), m)];
            let report = swarm_report(&trace, baseline);
            (trace, report)
        }
        _ => {
            let trace = run_bee(&mut world, &spec, m, config.horizon)?;
            let report = bee_report(&trace, &profile);
            (trace, report)
        }
    };
    let rounds: Vec<u64> = if config.full_trace { (1..=config.horizon).collect() } else { checkpoints(config.horizon) };
    let rows = rounds
        .into_iter()
        .map(|round| {
            let k = (round - 1) as usize;
            let outcome = &trace.rounds[k];
            TraceRow {
                mode: config.mode,
                policy: kind,
                m,
                replication: rep,
                round,
                leader: outcome.leader,
                decision_correct: outcome.decision_correct(),
                cum_realized_regret: report.cumulative_realized[k],
                cum_pseudo_regret: report.cumulative_pseudo[k],
            }
        })
        .collect();
    log::debug!("{} {} m={m} rep={rep}: realized {:.5}", config.mode.name(), kind, report.normalized_realized);
    Ok(RunResult {
        realized: report.normalized_realized,
        pseudo: report.normalized_pseudo,
        baseline: report.baseline,
        rows,
    })
}

fn baseline_key(config: &ExperimentConfig, rep: u64) -> u64 {
    if config.fixed_profile {
        0
    } else {
        rep
    }
}

/// Oracle committee accuracy for every (profile, m) a SWARM sweep needs.
fn swarm_baselines(config: &ExperimentConfig) -> std::result::Result<HashMap<(u64, usize), f64>, BeeError> {
    let reps: Vec<u64> = if config.fixed_profile { vec![0] } else { (0..config.replications).collect() };
    let keys: Vec<(u64, usize)> = reps.iter().flat_map(|&r| config.m_values.iter().map(move |&m| (r, m))).collect();
    let values = keys
        .par_iter()
        .map(|&(rep, m)| Ok(oracle_committee_accuracy(&profile_for(config, rep)?, m)?.value))
        .collect::<std::result::Result<Vec<f64>, BeeError>>()?;
    Ok(keys.into_iter().zip(values).collect())
}

/// Runs the BEE or SWARM sweep without touching the filesystem.
pub fn sweep(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    if config.mode == Mode::FixedCommitteeLemma {
        return Err(ConfigError::Invalid {
            field: "mode",
            message: "use the lemma validation for fixed-committee-lemma".into(),
        }
        .into());
    }
    let pool = thread_pool(config.workers)?;
    pool.install(|| {
        let baselines = if config.mode == Mode::Swarm { swarm_baselines(config)? } else { HashMap::new() };
        let cells: Vec<(PolicyKind, usize, u64)> = config
            .policies
            .iter()
            .flat_map(|&k| config.m_values.iter().flat_map(move |&m| (0..config.replications).map(move |r| (k, m, r))))
            .collect();
        log::info!("{} sweep: {} runs", config.mode.name(), cells.len());
        let results = cells
            .par_iter()
            .map(|&(k, m, r)| run_cell(config, k, m, r, &baselines))
            .collect::<std::result::Result<Vec<_>, BeeError>>()?;

        let mut out = ExperimentOutput::default();
        let reps = config.replications as usize;
        for (cell, chunk) in cells.chunks(reps).zip(results.chunks(reps)) {
            let (policy, m, _) = cell[0];
            let realized: Vec<f64> = chunk.iter().map(|r| r.realized).collect();
            let pseudo: Vec<f64> = chunk.iter().map(|r| r.pseudo).collect();
            out.summary.push(CellSummary {
                mode: config.mode,
                policy,
                m,
                replications: config.replications,
                horizon: config.horizon,
                experts: config.expert_count,
                realized: ReplicationStats::from_values(&realized),
                pseudo: ReplicationStats::from_values(&pseudo),
                baseline: chunk.iter().map(|r| r.baseline).sum::<f64>() / reps as f64,
            });
        }
        out.traces = results.into_iter().flat_map(|r| r.rows).collect();
        Ok(out)
    })
}

fn write_config(dir: &Path, config: &ExperimentConfig) -> Result<()> {
    let json = serde_json::to_string_pretty(config).map_err(std::io::Error::other)?;
    fs::write(dir.join("config.json"), json + "\n")?;
    Ok(())
}

/// Runs the sweep and writes `summary.csv`, `trace.csv` and `config.json`
/// into the configured output directory.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let out = sweep(config)?;
    let dir = &config.output_directory;
    fs::create_dir_all(dir)?;
    write_lines(&dir.join("summary.csv"), SUMMARY_HEADER, out.summary.iter().map(CellSummary::csv))?;
    write_lines(&dir.join("trace.csv"), TRACE_HEADER, out.traces.iter().map(TraceRow::csv))?;
    write_config(dir, config)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LemmaRow {
    pub policy: PolicyKind,
    pub committee_size: usize,
    pub p_committee: f64,
    pub horizon: u64,
    pub phi: f64,
    pub bound: f64,
    /// Mean over replications of the agreement-space pseudo regret up to `horizon`.
    pub empirical_pseudo_regret: f64,
}

impl LemmaRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.policy.name(),
            self.committee_size,
            fmt_float(self.p_committee),
            self.horizon,
            fmt_float(self.phi),
            fmt_float(self.bound),
            fmt_float(self.empirical_pseudo_regret),
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct LemmaOutput {
    pub rows: Vec<LemmaRow>,
}

impl LemmaOutput {
    /// Row at the full horizon for `policy`.
    pub fn final_row(&self, policy: PolicyKind) -> Option<&LemmaRow> {
        self.rows.iter().filter(|r| r.policy == policy).max_by_key(|r| r.horizon)
    }
}

/// Pinned-committee runs with the regret bound evaluated alongside.
pub fn lemma_sweep(config: &ExperimentConfig) -> Result<LemmaOutput> {
    let mut config = config.clone();
    config.mode = Mode::FixedCommitteeLemma;
    config.validate()?;
    let profile = CompetenceProfile::new(config.lemma.competences())?;
    let peers = config.lemma.committee();
    let horizons = checkpoints(config.horizon);
    // refuses incompetent committees before any simulation
    let reference = lemma_bound(&profile, &peers, PolicyKind::Ucb1, config.horizon, config.thompson_epsilon)?;
    let p_c = reference.params.committee_correct;
    let best = (0..profile.expert_count())
        .filter(|i| !peers.contains(i))
        .map(|i| profile.get(i))
        .fold(f64::NEG_INFINITY, f64::max);

    let pool = thread_pool(config.workers)?;
    let mut out = LemmaOutput::default();
    for &kind in &config.policies {
        let spec = PolicySpec::new(kind).with_horizon(config.horizon, profile.expert_count()).with_klucb(config.klucb_variant, config.klucb_c);
        let curves = pool.install(|| {
            (0..config.replications)
                .into_par_iter()
                .map(|rep| {
                    let mut world = World::new(profile.clone(), WorldSeed::with_replication(config.master_seed, rep));
                    let trace = run_fixed_committee(&mut world, &spec, &peers, config.horizon)?;
                    let mut acc = 0.0;
                    let cumulative: Vec<f64> = trace
                        .rounds
                        .iter()
                        .map(|r| {
                            acc += pseudo_gap(best, profile.get(r.leader), p_c);
                            acc
                        })
                        .collect();
                    Ok(horizons.iter().map(|&t| cumulative[(t - 1) as usize] / t as f64).collect::<Vec<f64>>())
                })
                .collect::<std::result::Result<Vec<_>, BeeError>>()
        })?;
        for (k, &t) in horizons.iter().enumerate() {
            let b = lemma_bound(&profile, &peers, kind, t, config.thompson_epsilon)?;
            let empirical = curves.iter().map(|c| c[k]).sum::<f64>() / curves.len() as f64;
            out.rows.push(LemmaRow {
                policy: kind,
                committee_size: peers.len(),
                p_committee: p_c,
                horizon: t,
                phi: b.params.potential,
                bound: b.bound,
                empirical_pseudo_regret: empirical,
            });
        }
    }
    Ok(out)
}

/// Runs the pinned-committee validation and writes `lemma.csv` and `config.json`.
pub fn run_lemma_validation(config: &ExperimentConfig) -> Result<LemmaOutput> {
    let out = lemma_sweep(config)?;
    let dir = &config.output_directory;
    fs::create_dir_all(dir)?;
    write_lines(&dir.join("lemma.csv"), LEMMA_HEADER, out.rows.iter().map(LemmaRow::csv))?;
    write_config(dir, config)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub m: usize,
    pub accuracy: f64,
    pub std_error: f64,
    pub method: OracleMethod,
}

impl OracleRow {
    pub const HEADER: &'static str = "m,oracle_accuracy,std_error,method";

    pub fn csv(&self) -> String {
        let method = match self.method {
            OracleMethod::Enumeration => "enumeration",
            OracleMethod::MonteCarlo => "monte-carlo",
        };
        format!("{},{},{},{}", self.m, fmt_float(self.accuracy), fmt_float(self.std_error), method)
    }
}

/// Oracle committee accuracy for each configured `m` on replication 0's profile.
pub fn oracle_table(config: &ExperimentConfig) -> Result<Vec<OracleRow>> {
    let profile = profile_for(config, 0)?;
    let pool = thread_pool(config.workers)?;
    pool.install(|| {
        config
            .m_values
            .iter()
            .map(|&m| {
                let o = oracle_committee_accuracy(&profile, m)?;
                Ok(OracleRow { m, accuracy: o.value, std_error: o.std_error, method: o.method })
            })
            .collect()
    })
}
