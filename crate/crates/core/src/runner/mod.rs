//! Experiment orchestration: tradeoff sweeps, the concentration suite and
//! the subcommand bodies used by the command-line front end.

pub mod commands;
pub mod parse;
mod suite;
mod tradeoff;

pub use suite::{concentration_suite, param_lip_instances, CheckOutcome, SuiteCheck, SuiteConfig, SuiteReport};
pub use tradeoff::{
    interp_mse, rows_from_csv, rows_to_csv, sidecar, slope_fit, tradeoff_experiment, write_tradeoff, ExperimentConfig,
    SkippedCell, SlopeFit, Sweep, TradeoffResult, TradeoffRow, TradeoffSidecar, CSV_HEADER, CSV_VERSION, EXACT_FIT_TOL,
};
