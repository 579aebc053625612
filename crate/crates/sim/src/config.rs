//! Flat `key = value` scenario files.
//!
//! Blank lines and lines starting with `#` are skipped. Later sources
//! override earlier ones: preset, then config file, then command-line flags.
//!
//! | key | meaning | default |
//! |-----|---------|---------|
//! | `substrate.F`, `substrate.T` | frequency and time blocks | 12, 12 |
//! | `traffic.lambda` | mean arrivals per slot | 3.0 |
//! | `traffic.mu` | mean lifespan in slots | 10.0 |
//! | `traffic.K` | priority levels | 3 |
//! | `traffic.f_min`, `traffic.f_max` | inclusive frequency span range | 1, 3 |
//! | `traffic.td_min`, `traffic.td_max` | inclusive time span range | 1, 3 |
//! | `traffic.horizon` | slots to simulate | 1000 |
//! | `traffic.trace` | trace file to replay instead of sampling (`builtin:<name>` for a bundled one) | none |
//! | `costs.p1` .. `costs.pK` | cost per resource block of each priority | 0.5, 0.3, 0.2 |
//! | `delay.p1` .. `delay.pK` | maximum buffer wait in slots | 1, 2, 3 |
//! | `embed.combination_cap` | largest level the greedy embedder enumerates | 12 |
//! | `run.modes` | comma-separated embedder names | static-km,dynamic-km,dynamic-greedy |
//! | `run.seeds` | comma-separated seeds or inclusive ranges `a..=b` | `VNE_SIM_SEED`, else 1..=20 |
//! | `run.out` | output directory | out |
//! | `run.drain` | keep stepping after the horizon until the buffer is empty | false |
//! | `compare.baseline` | preset to run alongside for a cross-scenario comparison | none |
//!
//! When `traffic.trace` is set the substrate, priority levels, horizon and
//! seed come from the trace header and the sampling keys are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;
use vne_core::embed::DEFAULT_COMBINATION_CAP;
use vne_core::{EmbedderMode, PriorityCosts, SubstrateDims, Trace, TrafficConfig};

use crate::presets;
use crate::trace_io::{self, ParseError};

pub const SEED_ENV: &str = "VNE_SIM_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{origin}:{line}: {message}")]
    Syntax {
        origin: String,
        line: usize,
        message: String,
    },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("`{key}` = `{value}`: {reason}")]
    BadValue { key: String, value: String, reason: String },
    #[error("missing key `{0}`")]
    Missing(String),
    #[error("unknown preset `{0}` (available: {list})", list = presets::names().join(", "))]
    UnknownPreset(String),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("trace {path}: {source}")]
    Trace { path: String, source: ParseError },
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Entry {
    value: String,
    origin: String,
}

/// Raw keys with the source each value came from.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyValues {
    entries: BTreeMap<String, Entry>,
}

const SCALAR_KEYS: &[&str] = &[
    "substrate.F",
    "substrate.T",
    "traffic.lambda",
    "traffic.mu",
    "traffic.K",
    "traffic.f_min",
    "traffic.f_max",
    "traffic.td_min",
    "traffic.td_max",
    "traffic.horizon",
    "traffic.trace",
    "embed.combination_cap",
    "run.modes",
    "run.seeds",
    "run.out",
    "run.drain",
    "compare.baseline",
];

fn per_priority(key: &str) -> Option<(&str, u32)> {
    let (group, level) = key.split_once(".p")?;
    let level: u32 = level.parse().ok()?;
    (matches!(group, "costs" | "delay") && level >= 1).then_some((group, level))
}

fn known(key: &str) -> bool {
    SCALAR_KEYS.contains(&key) || per_priority(key).is_some()
}

impl KeyValues {
    pub fn parse(text: &str, origin: &str) -> Result<Self, ConfigError> {
        let mut kv = Self::default();
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                origin: origin.into(),
                line: k + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let key = key.trim();
            if !known(key) {
                return Err(ConfigError::Syntax {
                    origin: origin.into(),
                    line: k + 1,
                    message: format!("unknown key `{key}`"),
                });
            }
            kv.insert(key, value.trim(), &format!("{origin}:{}", k + 1));
        }
        Ok(kv)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.into(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn preset(name: &str) -> Result<Self, ConfigError> {
        let text = presets::config(name).ok_or_else(|| ConfigError::UnknownPreset(name.into()))?;
        Self::parse(text, &format!("preset {name}"))
    }

    /// Sets one key, checking that it is part of the schema.
    pub fn set(&mut self, key: &str, value: &str, origin: &str) -> Result<(), ConfigError> {
        if !known(key) {
            return Err(ConfigError::UnknownKey(key.into()));
        }
        self.insert(key, value, origin);
        Ok(())
    }

    fn insert(&mut self, key: &str, value: &str, origin: &str) {
        self.entries.insert(
            key.into(),
            Entry {
                value: value.into(),
                origin: origin.into(),
            },
        );
    }

    /// Applies `other` on top of `self`.
    pub fn overlay(&mut self, other: KeyValues) {
        self.entries.extend(other.entries);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.value.as_str())
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, ConfigError>
    where
        T::Err: std::fmt::Display,
    {
        match self.entries.get(key) {
            None => Ok(default),
            Some(e) => e.value.parse().map_err(|err: T::Err| ConfigError::BadValue {
                key: key.into(),
                value: e.value.clone(),
                reason: format!("{err} ({})", e.origin),
            }),
        }
    }

    fn bad(&self, key: &str, reason: impl Into<String>) -> ConfigError {
        ConfigError::BadValue {
            key: key.into(),
            value: self.get(key).unwrap_or_default().into(),
            reason: reason.into(),
        }
    }
}

/// Where the requests of a scenario come from.
#[derive(Clone, Debug, PartialEq)]
pub enum Workload {
    Sampled(TrafficConfig),
    Replay { source: String, trace: Trace },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub dims: SubstrateDims,
    pub workload: Workload,
    pub costs: PriorityCosts,
    pub max_delays: Vec<u32>,
    pub combination_cap: usize,
    pub modes: Vec<EmbedderMode>,
    pub seeds: Vec<u64>,
    pub out: PathBuf,
    pub drain: bool,
    pub baseline: Option<String>,
}

pub fn parse_seeds(text: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        if let Some((lo, hi)) = part.split_once("..=") {
            let lo: u64 = lo.trim().parse().map_err(|_| format!("`{part}` is not a seed range"))?;
            let hi: u64 = hi.trim().parse().map_err(|_| format!("`{part}` is not a seed range"))?;
            if lo > hi {
                return Err(format!("empty seed range `{part}`"));
            }
            seeds.extend(lo..=hi);
        } else {
            seeds.push(part.parse().map_err(|_| format!("`{part}` is not a seed"))?);
        }
    }
    if seeds.is_empty() {
        return Err("at least one seed is required".into());
    }
    Ok(seeds)
}

pub fn parse_modes(text: &str) -> Result<Vec<EmbedderMode>, String> {
    let mut modes = Vec::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m: EmbedderMode = part.parse().map_err(|_| {
            let names: Vec<&str> = EmbedderMode::ALL.iter().map(EmbedderMode::name).collect();
            format!("unknown mode `{part}` (expected one of {})", names.join(", "))
        })?;
        if !modes.contains(&m) {
            modes.push(m);
        }
    }
    if modes.is_empty() {
        return Err("at least one mode is required".into());
    }
    Ok(modes)
}

fn load_workload_trace(source: &str) -> Result<Trace, ConfigError> {
    let err = |e| ConfigError::Trace {
        path: source.into(),
        source: e,
    };
    match source.strip_prefix("builtin:") {
        Some(name) => {
            let text = presets::trace(name).ok_or_else(|| ConfigError::UnknownPreset(source.into()))?;
            trace_io::parse_trace(text).map_err(err)
        }
        None => trace_io::load_trace(Path::new(source)).map_err(err),
    }
}

impl ScenarioConfig {
    /// Resolves `kv` against the defaults. `env_seed` is the value of
    /// `VNE_SIM_SEED`, used when no seeds are configured.
    pub fn resolve(kv: &KeyValues, env_seed: Option<&str>) -> Result<Self, ConfigError> {
        let base = TrafficConfig::default_scenario(0);
        let replay = match kv.get("traffic.trace") {
            Some(src) => Some((src.to_string(), load_workload_trace(src)?)),
            None => None,
        };

        let (dims, levels) = match &replay {
            Some((_, trace)) => {
                let h = trace.header();
                for (key, want) in [
                    ("substrate.F", h.dims.f_blocks()),
                    ("substrate.T", h.dims.t_blocks()),
                    ("traffic.K", h.priority_levels as usize),
                ] {
                    if kv.get(key).is_some() && kv.parsed::<usize>(key, want)? != want {
                        return Err(kv.bad(key, format!("the replayed trace has {want}")));
                    }
                }
                (h.dims, h.priority_levels)
            }
            None => {
                let f = kv.parsed("substrate.F", base.dims.f_blocks())?;
                let t = kv.parsed("substrate.T", base.dims.t_blocks())?;
                let dims = SubstrateDims::new(f, t).map_err(|e| ConfigError::Invalid(e.to_string()))?;
                (dims, kv.parsed("traffic.K", base.priority_levels)?)
            }
        };
        if levels == 0 {
            return Err(kv.bad("traffic.K", "at least one priority level is required"));
        }

        for key in kv.entries.keys() {
            if let Some((_, p)) = per_priority(key) {
                if p > levels {
                    return Err(kv.bad(key, format!("only {levels} priority levels are configured")));
                }
            }
        }
        let default_costs = PriorityCosts::three_level_default();
        let mut costs = Vec::new();
        let mut max_delays = Vec::new();
        for p in 1..=levels {
            let ck = format!("costs.p{p}");
            let dk = format!("delay.p{p}");
            let dc = default_costs.as_slice().get(p as usize - 1).copied();
            let dd = (p <= 3).then_some(p);
            match (kv.get(&ck), dc) {
                (Some(_), _) => costs.push(kv.parsed(&ck, 0.0)?),
                (None, Some(c)) => costs.push(c),
                (None, None) => return Err(ConfigError::Missing(ck)),
            }
            match (kv.get(&dk), dd) {
                (Some(_), _) => max_delays.push(kv.parsed(&dk, 0)?),
                (None, Some(d)) => max_delays.push(d),
                (None, None) => return Err(ConfigError::Missing(dk)),
            }
        }
        let costs = PriorityCosts::new(costs).map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if let Some(p) = max_delays.iter().position(|&d| d == 0) {
            return Err(kv.bad(&format!("delay.p{}", p + 1), "maximum delay must be at least one slot"));
        }

        let workload = match replay {
            Some((source, trace)) => Workload::Replay { source, trace },
            None => {
                let traffic = TrafficConfig {
                    dims,
                    lambda: kv.parsed("traffic.lambda", base.lambda)?,
                    mu: kv.parsed("traffic.mu", base.mu)?,
                    priority_levels: levels,
                    f_range: (
                        kv.parsed("traffic.f_min", base.f_range.0)?,
                        kv.parsed("traffic.f_max", base.f_range.1)?,
                    ),
                    td_range: (
                        kv.parsed("traffic.td_min", base.td_range.0)?,
                        kv.parsed("traffic.td_max", base.td_range.1)?,
                    ),
                    horizon: kv.parsed("traffic.horizon", base.horizon)?,
                    seed: 0,
                };
                traffic.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
                Workload::Sampled(traffic)
            }
        };

        let modes = match kv.get("run.modes") {
            Some(v) => parse_modes(v).map_err(|r| kv.bad("run.modes", r))?,
            None => EmbedderMode::HEURISTICS.to_vec(),
        };
        let seeds = match (&workload, kv.get("run.seeds"), env_seed) {
            (Workload::Replay { trace, .. }, _, _) => vec![trace.header().seed],
            (_, Some(v), _) => parse_seeds(v).map_err(|r| kv.bad("run.seeds", r))?,
            (_, None, Some(env)) => {
                vec![env.trim().parse().map_err(|_| ConfigError::BadValue {
                    key: SEED_ENV.into(),
                    value: env.into(),
                    reason: "not a 64-bit seed".into(),
                })?]
            }
            (_, None, None) => (1..=20).collect(),
        };
        let combination_cap = kv.parsed("embed.combination_cap", DEFAULT_COMBINATION_CAP)?;
        if combination_cap > 24 {
            return Err(kv.bad(
                "embed.combination_cap",
                "at most 24 requests per level can be enumerated",
            ));
        }
        let baseline = kv.get("compare.baseline").map(str::to_string);
        if let Some(b) = &baseline {
            if presets::config(b).is_none() {
                return Err(ConfigError::UnknownPreset(b.clone()));
            }
        }

        Ok(Self {
            dims,
            workload,
            costs,
            max_delays,
            combination_cap,
            modes,
            seeds,
            out: PathBuf::from(kv.get("run.out").unwrap_or("out")),
            drain: kv.parsed("run.drain", false)?,
            baseline,
        })
    }

    pub fn priority_levels(&self) -> usize {
        self.costs.levels()
    }

    /// The fully resolved configuration as `key = value` lines, in a fixed
    /// order.
    pub fn echo(&self) -> Vec<String> {
        let mut lines = vec![
            format!("substrate.F = {}", self.dims.f_blocks()),
            format!("substrate.T = {}", self.dims.t_blocks()),
        ];
        match &self.workload {
            Workload::Sampled(t) => {
                lines.push(format!("traffic.lambda = {:?}", t.lambda));
                lines.push(format!("traffic.mu = {:?}", t.mu));
                lines.push(format!("traffic.K = {}", t.priority_levels));
                lines.push(format!("traffic.f_min = {}", t.f_range.0));
                lines.push(format!("traffic.f_max = {}", t.f_range.1));
                lines.push(format!("traffic.td_min = {}", t.td_range.0));
                lines.push(format!("traffic.td_max = {}", t.td_range.1));
                lines.push(format!("traffic.horizon = {}", t.horizon));
            }
            Workload::Replay { source, trace } => {
                lines.push(format!("traffic.trace = {source}"));
                lines.push(format!("traffic.K = {}", trace.header().priority_levels));
                lines.push(format!("traffic.horizon = {}", trace.header().horizon));
            }
        }
        for (k, c) in self.costs.as_slice().iter().enumerate() {
            lines.push(format!("costs.p{} = {c:?}", k + 1));
        }
        for (k, d) in self.max_delays.iter().enumerate() {
            lines.push(format!("delay.p{} = {d}", k + 1));
        }
        lines.push(format!("embed.combination_cap = {}", self.combination_cap));
        let modes: Vec<&str> = self.modes.iter().map(EmbedderMode::name).collect();
        lines.push(format!("run.modes = {}", modes.join(",")));
        lines.push(format!("run.seeds = {}", format_seeds(&self.seeds)));
        lines.push(format!("run.drain = {}", self.drain));
        if let Some(b) = &self.baseline {
            lines.push(format!("compare.baseline = {b}"));
        }
        lines
    }

    /// [`Self::echo`] as `# `-prefixed header lines.
    pub fn echo_comment(&self) -> String {
        let mut s = String::new();
        for line in self.echo() {
            let _ = writeln!(s, "# {line}");
        }
        s
    }
}

/// Compact seed list, collapsing consecutive runs into `a..=b`.
pub fn format_seeds(seeds: &[u64]) -> String {
    let mut parts = Vec::new();
    let mut k = 0;
    while k < seeds.len() {
        let mut end = k;
        while end + 1 < seeds.len() && seeds[end + 1] == seeds[end].wrapping_add(1) {
            end += 1;
        }
        if end > k {
            parts.push(format!("{}..={}", seeds[k], seeds[end]));
        } else {
            parts.push(seeds[k].to_string());
        }
        k = end + 1;
    }
    parts.join(",")
}
