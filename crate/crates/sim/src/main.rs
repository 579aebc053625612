use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vne_core::SubstrateDims;
use vne_sim::config::{KeyValues, ScenarioConfig, SEED_ENV};
use vne_sim::oracle::{run_oracle_check, OracleParams};
use vne_sim::plot::{emit_plot_data, PlotError};
use vne_sim::{presets, run_scenario, runner, write_outputs, ConfigError};

#[derive(Parser)]
#[command(
    name = "vne-sim",
    version,
    about = "Virtual network embedding experiments on a frequency x time grid"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write per-slot CSVs, replications.csv and report.txt.
    Run(RunArgs),
    /// Compare the heuristics with the exhaustive optimum on random instances.
    OracleCheck(OracleArgs),
    /// Turn per-slot CSVs into running-mean series, one file per metric per mode.
    PlotData(PlotArgs),
    /// List the bundled presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file with `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled preset applied before the config file.
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated seeds or ranges `a..=b`.
    #[arg(long)]
    seeds: Option<String>,
    /// Comma-separated embedder modes.
    #[arg(long)]
    modes: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra `key=value` overrides, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 200)]
    instances: usize,
    /// Substrate as `FxT`.
    #[arg(long, default_value = "6x6")]
    dims: String,
    /// Falls back to VNE_SIM_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 2)]
    levels: u32,
    #[arg(long, default_value_t = 4)]
    max_requests: usize,
}

#[derive(Args)]
struct PlotArgs {
    /// Directory holding slots-*.csv files.
    #[arg(long = "in")]
    input: PathBuf,
    /// Where to write the series; defaults to the input directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

const CONFIG_FAILURE: u8 = 2;
const RUNTIME_FAILURE: u8 = 1;

fn fail(code: u8, message: impl std::fmt::Display) -> ExitCode {
    eprintln!("vne-sim: {message}");
    ExitCode::from(code)
}

fn resolve_run(args: &RunArgs) -> Result<ScenarioConfig, ConfigError> {
    if args.config.is_none() && args.preset.is_none() {
        return Err(ConfigError::Invalid("give --config, --preset or both".into()));
    }
    let mut kv = match &args.preset {
        Some(name) => KeyValues::preset(name)?,
        None => KeyValues::default(),
    };
    if let Some(path) = &args.config {
        kv.overlay(KeyValues::load(path)?);
    }
    let flag = "command line";
    if let Some(s) = &args.seeds {
        kv.set("run.seeds", s, flag)?;
    }
    if let Some(m) = &args.modes {
        kv.set("run.modes", m, flag)?;
    }
    if let Some(o) = &args.out {
        kv.set("run.out", &o.display().to_string(), flag)?;
    }
    for o in &args.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| ConfigError::Invalid(format!("--set expects KEY=VALUE, got `{o}`")))?;
        kv.set(k.trim(), v.trim(), flag)?;
    }
    let env = std::env::var(SEED_ENV).ok();
    ScenarioConfig::resolve(&kv, env.as_deref())
}

fn cmd_run(args: RunArgs) -> ExitCode {
    let cfg = match resolve_run(&args) {
        Ok(c) => c,
        Err(e) => return fail(CONFIG_FAILURE, e),
    };
    let run = match run_scenario(&cfg) {
        Ok(r) => r,
        Err(e) => return fail(RUNTIME_FAILURE, e),
    };
    match write_outputs(&run, &cfg.out) {
        Ok(files) => {
            print!("{}", runner::report_body(&run));
            eprintln!("wrote {} files to {}", files.len(), cfg.out.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(RUNTIME_FAILURE, e),
    }
}

fn parse_dims(text: &str) -> Result<SubstrateDims, String> {
    let (f, t) = text
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("--dims expects FxT, got `{text}`"))?;
    let f = f.trim().parse().map_err(|_| format!("bad frequency size `{f}`"))?;
    let t = t.trim().parse().map_err(|_| format!("bad time size `{t}`"))?;
    SubstrateDims::new(f, t).map_err(|e| e.to_string())
}

fn cmd_oracle(args: OracleArgs) -> ExitCode {
    let dims = match parse_dims(&args.dims) {
        Ok(d) => d,
        Err(e) => return fail(CONFIG_FAILURE, e),
    };
    let seed = match (args.seed, std::env::var(SEED_ENV).ok()) {
        (Some(s), _) => s,
        (None, Some(env)) => match env.trim().parse() {
            Ok(s) => s,
            Err(_) => return fail(CONFIG_FAILURE, format!("{SEED_ENV}=`{env}` is not a 64-bit seed")),
        },
        (None, None) => 0,
    };
    let params = OracleParams {
        levels: args.levels,
        max_requests: args.max_requests,
        ..OracleParams::new(args.instances, dims, seed)
    };
    match run_oracle_check(&params) {
        Err(e) => fail(CONFIG_FAILURE, e),
        Ok(report) => {
            print!("{}", report.render());
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(RUNTIME_FAILURE)
            }
        }
    }
}

fn cmd_plot(args: PlotArgs) -> ExitCode {
    let out = args.out.clone().unwrap_or_else(|| args.input.clone());
    match emit_plot_data(&args.input, &out) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e @ (PlotError::MissingDir(_) | PlotError::NoInputs(_))) => fail(CONFIG_FAILURE, e),
        Err(e) => fail(RUNTIME_FAILURE, e),
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(a) => cmd_run(a),
        Command::OracleCheck(a) => cmd_oracle(a),
        Command::PlotData(a) => cmd_plot(a),
        Command::Presets => {
            for name in presets::names() {
                println!("{name}");
            }
            ExitCode::SUCCESS
        }
    }
}
