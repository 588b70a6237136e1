//! Experiment sweeps: configuration, parallel execution and CSV output.

mod config;
mod output;
mod run;

pub use config::{parse_config, ConfigError, ExperimentConfig, LemmaConfig, Mode, Overrides};
pub use output::{checkpoints, fmt_float, LEMMA_HEADER, SUMMARY_HEADER, TRACE_HEADER};
pub use run::{
    lemma_sweep, oracle_table, profile_for, run_experiment, run_lemma_validation, sweep, CellSummary, ExperimentOutput, HarnessError,
    LemmaRow, LemmaOutput, OracleRow, TraceRow,
};
