use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use bee_core::harness::{
    oracle_table, parse_config, run_experiment, run_lemma_validation, HarnessError, Mode, OracleRow, Overrides,
};
use bee_core::PolicyKind;

#[derive(Parser)]
#[command(name = "bee", version, about = "Blind exploration-exploitation experiments over stochastic experts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// BEE or SWARM sweep over policies, committee sizes and replications.
    Run(Flags),
    /// Pinned-committee runs against the regret bound.
    Lemma(Flags),
    /// Resolve and check the configuration, then print it.
    Validate(Flags),
    /// Print the oracle committee accuracy for each committee size.
    Oracle(Flags),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Bee,
    Swarm,
}

#[derive(Args)]
struct Flags {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    experts: Option<usize>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long = "comp-low")]
    comp_low: Option<f64>,
    #[arg(long = "comp-high")]
    comp_high: Option<f64>,
    /// Committee size; repeat for several.
    #[arg(long = "m")]
    m: Vec<usize>,
    /// ucb1, kl-ucb, imed, moss or thompson; repeat for several.
    #[arg(long)]
    policy: Vec<PolicyKind>,
    #[arg(long)]
    reps: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Share replication 0's competences across all replications.
    #[arg(long)]
    fixed_profile: bool,
    /// Write every round to trace.csv instead of log-spaced checkpoints.
    #[arg(long)]
    full_trace: bool,
    #[arg(long)]
    workers: Option<usize>,
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            mode: self.mode.map(|m| match m {
                ModeArg::Bee => Mode::Bee,
                ModeArg::Swarm => Mode::Swarm,
            }),
            expert_count: self.experts,
            horizon: self.horizon,
            competence_low: self.comp_low,
            competence_high: self.comp_high,
            m_values: (!self.m.is_empty()).then(|| self.m.clone()),
            policies: (!self.policy.is_empty()).then(|| self.policy.clone()),
            replications: self.reps,
            master_seed: self.seed,
            output_directory: self.out.clone(),
            fixed_profile: self.fixed_profile,
            full_trace: self.full_trace,
            workers: self.workers,
        }
    }
}

fn execute(command: Command) -> Result<(), HarnessError> {
    match command {
        Command::Run(flags) => {
            let config = parse_config(flags.config.as_deref(), &flags.overrides())?;
            let out = if config.mode == Mode::FixedCommitteeLemma {
                run_lemma_validation(&config)?;
                None
            } else {
                Some(run_experiment(&config)?)
            };
            if let Some(out) = out {
                for cell in &out.summary {
                    println!(
                        "{} {:<8} m={:<3} realized {:.5} ± {:.5}  pseudo {:.5} ± {:.5}",
                        cell.mode.name(),
                        cell.policy.name(),
                        cell.m,
                        cell.realized.mean,
                        cell.realized.std,
                        cell.pseudo.mean,
                        cell.pseudo.std
                    );
                }
            }
            println!("wrote {}", config.output_directory.display());
        }
        Command::Lemma(flags) => {
            let mut overrides = flags.overrides();
            overrides.mode = Some(Mode::FixedCommitteeLemma);
            let config = parse_config(flags.config.as_deref(), &overrides)?;
            let out = run_lemma_validation(&config)?;
            for &kind in &config.policies {
                if let Some(row) = out.final_row(kind) {
                    println!(
                        "{:<8} T={} p_C={:.6} bound {:.6} empirical {:.6}",
                        kind.name(),
                        row.horizon,
                        row.p_committee,
                        row.bound,
                        row.empirical_pseudo_regret
                    );
                }
            }
            println!("wrote {}", config.output_directory.join("lemma.csv").display());
        }
        Command::Validate(flags) => {
            let config = parse_config(flags.config.as_deref(), &flags.overrides())?;
            println!("{}", serde_json::to_string_pretty(&config).expect("config serializes"));
        }
        Command::Oracle(flags) => {
            let config = parse_config(flags.config.as_deref(), &flags.overrides())?;
            println!("{}", OracleRow::HEADER);
            for row in oracle_table(&config)? {
                println!("{}", row.csv());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
