//! Runs every (mode, seed) pair of a scenario and writes the CSV outputs.
//!
//! Runs execute in parallel; results are collected in configuration order
//! and written by a single thread, so outputs do not depend on scheduling.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;
use vne_core::sim::{run_with, RunOptions, SimError};
use vne_core::traffic::{generate_trace, TrafficError};
use vne_core::{EmbedderMode, SimParams, SimulationSummary, Trace, TrafficConfig};

use crate::config::{ConfigError, KeyValues, ScenarioConfig, Workload};
use crate::report::{render_outcomes, ComparisonReport, ReplicationRow, ScenarioComparison};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("seed {seed}: {source}")]
    Traffic { seed: u64, source: TrafficError },
    #[error("{mode}, seed {seed}: {source}")]
    Sim {
        mode: EmbedderMode,
        seed: u64,
        source: SimError,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("cannot write {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeRun {
    pub seed: u64,
    pub summary: SimulationSummary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioRun {
    pub config: ScenarioConfig,
    /// Mode-major, then seed, in configured order.
    pub runs: Vec<ModeRun>,
    pub rows: Vec<ReplicationRow>,
    pub report: ComparisonReport,
    pub baseline: Option<Baseline>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Baseline {
    pub name: String,
    pub run: Box<ScenarioRun>,
    pub comparison: ScenarioComparison,
}

impl ScenarioConfig {
    fn params(&self, mode: EmbedderMode) -> SimParams {
        SimParams {
            dims: self.dims,
            mode,
            costs: self.costs.clone(),
            max_delays: self.max_delays.clone(),
            combination_cap: self.combination_cap,
        }
    }
}

fn traces(cfg: &ScenarioConfig) -> Result<Vec<(u64, Trace)>, RunError> {
    match &cfg.workload {
        Workload::Replay { trace, .. } => Ok(vec![(trace.header().seed, trace.clone())]),
        Workload::Sampled(t) => cfg
            .seeds
            .par_iter()
            .map(|&seed| {
                generate_trace(&TrafficConfig { seed, ..t.clone() })
                    .map(|tr| (seed, tr))
                    .map_err(|source| RunError::Traffic { seed, source })
            })
            .collect(),
    }
}

/// Simulates the scenario, and its baseline preset when one is configured.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioRun, RunError> {
    let traces = traces(cfg)?;
    let jobs: Vec<(EmbedderMode, usize)> = cfg
        .modes
        .iter()
        .flat_map(|&m| (0..traces.len()).map(move |k| (m, k)))
        .collect();
    let options = RunOptions { drain: cfg.drain };
    let runs = jobs
        .par_iter()
        .map(|&(mode, k)| {
            let (seed, trace) = &traces[k];
            run_with(trace, &cfg.params(mode), options)
                .map(|summary| ModeRun { seed: *seed, summary })
                .map_err(|source| RunError::Sim {
                    mode,
                    seed: *seed,
                    source,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<ReplicationRow> = runs.iter().map(|r| ReplicationRow::new(r.seed, &r.summary)).collect();
    let report = ComparisonReport::new(&rows, &cfg.modes, cfg.priority_levels());

    let baseline = match &cfg.baseline {
        None => None,
        Some(name) => {
            let mut base_cfg = ScenarioConfig::resolve(&KeyValues::preset(name)?, None)?;
            base_cfg.seeds = cfg.seeds.clone();
            base_cfg.modes = cfg.modes.clone();
            base_cfg.baseline = None;
            base_cfg.out = cfg.out.join("baseline");
            let base = run_scenario(&base_cfg)?;
            let comparison = ScenarioComparison::new(&rows, &base.rows, &cfg.modes, cfg.priority_levels());
            Some(Baseline {
                name: name.clone(),
                run: Box::new(base),
                comparison,
            })
        }
    };
    Ok(ScenarioRun {
        config: cfg.clone(),
        runs,
        rows,
        report,
        baseline,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Per-slot CSV of one run.
pub fn slot_csv(cfg: &ScenarioConfig, run: &ModeRun) -> String {
    let mut s = cfg.echo_comment();
    let _ = writeln!(s, "# mode = {}", run.summary.mode);
    let _ = writeln!(s, "# seed = {}", run.seed);
    s.push_str("slot,revenue,rejection_rate,accepted,rejected,deferred,occupancy,reembed_failures\n");
    for m in &run.summary.slots {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{}",
            m.slot,
            m.revenue,
            opt(m.rejection_rate),
            m.accepted.len(),
            m.rejected.len(),
            m.deferred,
            m.occupancy,
            m.reembed_failures
        );
    }
    s
}

/// One row per (seed, mode).
pub fn replication_csv(cfg: &ScenarioConfig, rows: &[ReplicationRow]) -> String {
    let mut s = cfg.echo_comment();
    s.push_str("seed,mode,mean_revenue,mean_rejection_rate,accepted,rejected,reembed_failures");
    for p in 1..=cfg.priority_levels() {
        let _ = write!(s, ",rejection_p{p}");
    }
    s.push('\n');
    for r in rows {
        let _ = write!(
            s,
            "{},{},{},{},{},{},{}",
            r.seed,
            r.mode,
            r.mean_revenue,
            opt(r.mean_rejection_rate),
            r.accepted,
            r.rejected,
            r.reembed_failures
        );
        for v in &r.priority_rejection {
            let _ = write!(s, ",{}", opt(*v));
        }
        s.push('\n');
    }
    s
}

/// The text report without its configuration header.
pub fn report_body(run: &ScenarioRun) -> String {
    if matches!(run.config.workload, Workload::Replay { .. }) {
        let summaries: Vec<&SimulationSummary> = run.runs.iter().map(|r| &r.summary).collect();
        return render_outcomes(&summaries);
    }
    let mut s = run.report.render();
    if let Some(b) = &run.baseline {
        s.push('\n');
        s.push_str(&b.comparison.render(&b.name));
    }
    s
}

pub fn slot_file_name(mode: EmbedderMode, seed: u64) -> String {
    format!("slots-{}-seed{seed}.csv", mode.name())
}

fn write(path: PathBuf, text: &str, written: &mut Vec<PathBuf>) -> Result<(), RunError> {
    fs::write(&path, text).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    written.push(path);
    Ok(())
}

/// Writes per-slot CSVs, `replications.csv` and `report.txt` under `dir`,
/// and the baseline's outputs under `dir/baseline`.
pub fn write_outputs(run: &ScenarioRun, dir: &Path) -> Result<Vec<PathBuf>, RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.into(),
        source,
    })?;
    let mut written = Vec::new();
    for r in &run.runs {
        write(
            dir.join(slot_file_name(r.summary.mode, r.seed)),
            &slot_csv(&run.config, r),
            &mut written,
        )?;
    }
    write(
        dir.join("replications.csv"),
        &replication_csv(&run.config, &run.rows),
        &mut written,
    )?;
    let report = format!("{}{}", run.config.echo_comment(), report_body(run));
    write(dir.join("report.txt"), &report, &mut written)?;
    if let Some(b) = &run.baseline {
        written.extend(write_outputs(&b.run, &dir.join("baseline"))?);
    }
    Ok(written)
}
