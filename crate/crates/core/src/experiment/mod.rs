//! Config-driven experiments: parsing, oracles, runs, trace files, and the
//! geometry and Example 4.4 reports.

pub mod commands;
pub mod config;
pub mod trace;

pub use commands::{
    cmd_check_geometry, cmd_example44, cmd_oracle, cmd_run, cmd_run_many, compute_oracle, config_hash,
    declared_fixed_set, run_config, Example44Report, ExitStatus, FixedSet, OracleMethod, OracleReport, RunOptions,
    RunOutcome, RunSummary, GAMMA_CONVENTION, OUT_DIR_ENV, TOOL_VERSION,
};
pub use config::{ExperimentConfig, OracleSpec, SCHEMA_VERSION};
