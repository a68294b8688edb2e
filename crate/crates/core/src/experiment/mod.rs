//! Experiment harness: preset properties, TOML-configured multi-trial
//! runs over an (agent × sample-period) grid, aggregation into summary
//! tables, and the significance tests those tables carry.

pub mod config;
pub mod presets;
pub mod runner;
pub mod stats;

pub use config::{
    AgentEntry, ChannelSpec, ConfigError, ExperimentConfig, ExperimentSection, ModelSection,
    OutputSpec, PropertySection,
};
pub use presets::{at_observation_spec, preset, preset_names, preset_source, PRESETS};
pub use runner::{
    median_episodes, records_csv, resolve_property, run_experiment, run_experiment_with,
    summary_csv, trial_seed, CellSummary, Execution, ExperimentError, ExperimentOutcome,
    SummaryRow, TrialRecord,
};
pub use stats::{fisher_exact, mann_whitney_u};
