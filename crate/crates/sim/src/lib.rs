//! Scenario runner for `vne-core`: config files and presets, trace files,
//! parallel replications with CSV output, comparison reports, the oracle
//! check and plot-data export. The `vne-sim` binary wraps these.

pub mod config;
pub mod oracle;
pub mod plot;
pub mod presets;
pub mod report;
pub mod runner;
pub mod trace_io;

pub use config::{ConfigError, KeyValues, ScenarioConfig};
pub use runner::{run_scenario, write_outputs, RunError, ScenarioRun};
