//! Aggregates over replications and the text report.

use std::fmt::Write as _;

use vne_core::{EmbedderMode, NetworkId, SimulationSummary};

/// Per-(seed, mode) outcome, one row of the replication CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationRow {
    pub seed: u64,
    pub mode: EmbedderMode,
    pub mean_revenue: f64,
    pub mean_rejection_rate: Option<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub reembed_failures: u64,
    pub priority_rejection: Vec<Option<f64>>,
}

impl ReplicationRow {
    pub fn new(seed: u64, summary: &SimulationSummary) -> Self {
        Self {
            seed,
            mode: summary.mode,
            mean_revenue: summary.mean_revenue,
            mean_rejection_rate: summary.mean_rejection_rate,
            accepted: summary.total_accepted,
            rejected: summary.total_rejected,
            reembed_failures: summary.total_reembed_failures,
            priority_rejection: summary.priority_rejection.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeanSe {
    pub mean: f64,
    /// Standard error of the mean; 0 for a single value.
    pub se: f64,
    pub n: usize,
}

impl MeanSe {
    pub fn of(values: &[f64]) -> Option<Self> {
        let n = values.len();
        if n == 0 {
            return None;
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let se = if n > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, se, n })
    }
}

fn fmt_opt(v: Option<MeanSe>, digits: usize) -> String {
    match v {
        Some(m) => format!("{:.*} ± {:.*}", digits, m.mean, digits, m.se),
        None => "n/a".into(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModeAggregate {
    pub mode: EmbedderMode,
    pub revenue: MeanSe,
    pub rejection: Option<MeanSe>,
    /// Index 0 = priority 1.
    pub priority_rejection: Vec<Option<MeanSe>>,
}

/// `mode` against `against`, computed seed by seed and then averaged.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedComparison {
    pub mode: EmbedderMode,
    pub against: EmbedderMode,
    /// `100 · (r_against − r_mode) / r_against`.
    pub rejection_reduction_pct: Option<MeanSe>,
    /// `100 · (v_mode − v_against) / v_against`.
    pub revenue_gain_pct: Option<MeanSe>,
    /// `r_mode − r_against`.
    pub rejection_difference: Option<MeanSe>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComparisonReport {
    pub levels: usize,
    pub modes: Vec<ModeAggregate>,
    /// Every later mode against every earlier one, in configured order.
    pub paired: Vec<PairedComparison>,
}

fn rows_of(rows: &[ReplicationRow], mode: EmbedderMode) -> Vec<&ReplicationRow> {
    rows.iter().filter(|r| r.mode == mode).collect()
}

pub fn paired(rows: &[ReplicationRow], mode: EmbedderMode, against: EmbedderMode) -> PairedComparison {
    let mut reduction = Vec::new();
    let mut gain = Vec::new();
    let mut diff = Vec::new();
    for a in rows_of(rows, mode) {
        let Some(b) = rows.iter().find(|b| b.mode == against && b.seed == a.seed) else {
            continue;
        };
        if let (Some(ra), Some(rb)) = (a.mean_rejection_rate, b.mean_rejection_rate) {
            diff.push(ra - rb);
            if rb > 0.0 {
                reduction.push(100.0 * (rb - ra) / rb);
            }
        }
        if b.mean_revenue > 0.0 {
            gain.push(100.0 * (a.mean_revenue - b.mean_revenue) / b.mean_revenue);
        }
    }
    PairedComparison {
        mode,
        against,
        rejection_reduction_pct: MeanSe::of(&reduction),
        revenue_gain_pct: MeanSe::of(&gain),
        rejection_difference: MeanSe::of(&diff),
    }
}

impl ComparisonReport {
    pub fn new(rows: &[ReplicationRow], modes: &[EmbedderMode], levels: usize) -> Self {
        let aggregates = modes
            .iter()
            .filter_map(|&mode| {
                let rs = rows_of(rows, mode);
                let revenue = MeanSe::of(&rs.iter().map(|r| r.mean_revenue).collect::<Vec<_>>())?;
                let rejection = MeanSe::of(&rs.iter().filter_map(|r| r.mean_rejection_rate).collect::<Vec<_>>());
                let priority_rejection = (0..levels)
                    .map(|k| {
                        let v: Vec<f64> = rs
                            .iter()
                            .filter_map(|r| r.priority_rejection.get(k).copied().flatten())
                            .collect();
                        MeanSe::of(&v)
                    })
                    .collect();
                Some(ModeAggregate {
                    mode,
                    revenue,
                    rejection,
                    priority_rejection,
                })
            })
            .collect();
        let mut pairs = Vec::new();
        for (k, &mode) in modes.iter().enumerate() {
            for &against in &modes[..k] {
                pairs.push(paired(rows, mode, against));
            }
        }
        Self {
            levels,
            modes: aggregates,
            paired: pairs,
        }
    }

    pub fn aggregate(&self, mode: EmbedderMode) -> Option<&ModeAggregate> {
        self.modes.iter().find(|m| m.mode == mode)
    }

    pub fn pair(&self, mode: EmbedderMode, against: EmbedderMode) -> Option<&PairedComparison> {
        self.paired.iter().find(|p| p.mode == mode && p.against == against)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "mean per slot over seeds (± standard error)");
        let _ = writeln!(s, "{:<16} {:>18} {:>20}", "mode", "revenue", "rejection rate");
        for m in &self.modes {
            let _ = writeln!(
                s,
                "{:<16} {:>18} {:>20}",
                m.mode.name(),
                fmt_opt(Some(m.revenue), 3),
                fmt_opt(m.rejection, 4)
            );
        }
        if !self.paired.is_empty() {
            let _ = writeln!(s, "\npaired differences (seed by seed, then averaged)");
            for p in &self.paired {
                let _ = writeln!(
                    s,
                    "{} vs {}: rejection {}% lower, revenue {}% higher, rejection difference {}",
                    p.mode,
                    p.against,
                    fmt_opt(p.rejection_reduction_pct, 1),
                    fmt_opt(p.revenue_gain_pct, 2),
                    fmt_opt(p.rejection_difference, 4)
                );
            }
        }
        let _ = writeln!(s, "\nrejection rate by priority");
        let _ = write!(s, "{:<16}", "mode");
        for p in 1..=self.levels {
            let _ = write!(s, " {:>18}", format!("p{p}"));
        }
        let _ = writeln!(s);
        for m in &self.modes {
            let _ = write!(s, "{:<16}", m.mode.name());
            for v in &m.priority_rejection {
                let _ = write!(s, " {:>18}", fmt_opt(*v, 4));
            }
            let _ = writeln!(s);
        }
        s
    }
}

/// A scenario's aggregates relative to a baseline scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Shift {
    /// `None` for the pool of every mode.
    pub mode: Option<EmbedderMode>,
    /// Mean rejection rate divided by the baseline's.
    pub rejection_ratio: Option<f64>,
    /// `100 · (v − v_base) / v_base`.
    pub revenue_change_pct: Option<f64>,
    /// Per-priority mean rejection rate divided by the baseline's.
    pub priority_factors: Vec<Option<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioComparison {
    pub per_mode: Vec<Shift>,
    pub pooled: Shift,
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = v.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

fn shift(mode: Option<EmbedderMode>, cur: &[&ReplicationRow], base: &[&ReplicationRow], levels: usize) -> Shift {
    let ratio = |a: Option<f64>, b: Option<f64>| match (a, b) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    let rej = |rs: &[&ReplicationRow]| mean(rs.iter().filter_map(|r| r.mean_rejection_rate));
    let rev = |rs: &[&ReplicationRow]| mean(rs.iter().map(|r| r.mean_revenue));
    let pri = |rs: &[&ReplicationRow], k: usize| {
        mean(rs.iter().filter_map(|r| r.priority_rejection.get(k).copied().flatten()))
    };
    Shift {
        mode,
        rejection_ratio: ratio(rej(cur), rej(base)),
        revenue_change_pct: ratio(rev(cur), rev(base)).map(|r| 100.0 * (r - 1.0)),
        priority_factors: (0..levels).map(|k| ratio(pri(cur, k), pri(base, k))).collect(),
    }
}

impl ScenarioComparison {
    pub fn new(current: &[ReplicationRow], baseline: &[ReplicationRow], modes: &[EmbedderMode], levels: usize) -> Self {
        let per_mode = modes
            .iter()
            .map(|&m| shift(Some(m), &rows_of(current, m), &rows_of(baseline, m), levels))
            .collect();
        let cur: Vec<&ReplicationRow> = current.iter().filter(|r| modes.contains(&r.mode)).collect();
        let base: Vec<&ReplicationRow> = baseline.iter().filter(|r| modes.contains(&r.mode)).collect();
        let pooled = shift(None, &cur, &base, levels);
        Self { per_mode, pooled }
    }

    pub fn render(&self, baseline: &str) -> String {
        let f = |v: Option<f64>, suffix: &str| v.map_or("n/a".into(), |x| format!("{x:.2}{suffix}"));
        let mut s = format!("relative to {baseline}\n");
        for sh in self.per_mode.iter().chain([&self.pooled]) {
            let name = sh.mode.map_or("all modes", |m| m.name());
            let factors: Vec<String> = sh
                .priority_factors
                .iter()
                .enumerate()
                .map(|(k, v)| format!("p{} {}", k + 1, f(*v, "x")))
                .collect();
            let _ = writeln!(
                s,
                "{name}: rejection {}, revenue {}, by priority {}",
                f(sh.rejection_ratio, "x"),
                f(sh.revenue_change_pct, "%"),
                factors.join(" ")
            );
        }
        s
    }
}

/// One line per mode listing which requests were accepted and which were
/// rejected, for short scripted traces.
pub fn render_outcomes(runs: &[&SimulationSummary]) -> String {
    let ids = |v: &[NetworkId]| v.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
    let mut s = String::new();
    for run in runs {
        let accepted: Vec<NetworkId> = run.slots.iter().flat_map(|m| m.accepted.iter().copied()).collect();
        let rejected: Vec<String> = run
            .slots
            .iter()
            .flat_map(|m| m.rejected.iter().map(move |id| format!("{id}@slot{}", m.slot)))
            .collect();
        let _ = writeln!(
            s,
            "{}: accepted [{}] rejected [{}]",
            run.mode,
            ids(&accepted),
            rejected.join(" ")
        );
    }
    s
}
