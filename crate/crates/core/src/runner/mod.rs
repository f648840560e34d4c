//! Scenario configuration, end-to-end runs and sweeps.

pub mod config;
pub mod run;

pub use config::{ConfigFile, ModelKind, ScenarioConfig, BUILTIN_NAMES};
pub use run::{
    list_scenarios, run_scenario, sweep, GapReport, ManifestEntry, RunReport, SweepParam, SweepReport, SweepRow,
    SUMMARY_FILE, SWEEP_FILE,
};
