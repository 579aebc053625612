//! Heuristics against the exhaustive optimum on random single-slot
//! instances.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use thiserror::Error;
use vne_core::embed::{
    embed_exact, embed_with_mode, layout_revenue, verify_stage_result, EmbedError, ExactMode, Violation,
    DEFAULT_COMBINATION_CAP,
};
use vne_core::{EmbedRequest, EmbedderMode, NetworkId, OccupancyGrid, Placement, PriorityCosts, SubstrateDims};

/// Largest substrate side and request count the check accepts.
pub const MAX_SIDE: usize = 6;
pub const MAX_REQUESTS: usize = 6;
pub const MAX_EXISTING: usize = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct OracleParams {
    pub instances: usize,
    pub dims: SubstrateDims,
    pub seed: u64,
    pub levels: u32,
    /// New requests per instance, drawn from `0..=max_requests`.
    pub max_requests: usize,
    /// Running networks per instance, drawn from `0..=max_existing`.
    pub max_existing: usize,
    /// Largest span drawn on either axis.
    pub max_span: usize,
}

impl OracleParams {
    pub fn new(instances: usize, dims: SubstrateDims, seed: u64) -> Self {
        Self {
            instances,
            dims,
            seed,
            levels: 2,
            max_requests: 4,
            max_existing: 2,
            max_span: 4,
        }
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("substrate {0}x{1} is larger than {MAX_SIDE}x{MAX_SIDE}")]
    TooLarge(usize, usize),
    #[error("at most {MAX_REQUESTS} new and {MAX_EXISTING} running networks per instance are supported")]
    TooManyRequests,
    #[error("between 1 and 3 priority levels are supported, got {0}")]
    Levels(u32),
    #[error("span limit must be at least 1")]
    Span,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instance {
    pub dims: SubstrateDims,
    pub existing: Vec<EmbedRequest>,
    /// Index `k` holds priority `k + 1`.
    pub levels: Vec<Vec<EmbedRequest>>,
}

pub fn costs_for(levels: u32) -> PriorityCosts {
    let all = PriorityCosts::three_level_default();
    PriorityCosts::new(all.as_slice()[..levels as usize].to_vec()).expect("prefix of a valid cost vector")
}

pub fn random_instance(rng: &mut impl Rng, p: &OracleParams) -> Instance {
    let (rows, cols) = (p.dims.f_blocks(), p.dims.t_blocks());
    let mut grid = OccupancyGrid::new(p.dims);
    let mut existing = Vec::new();
    let mut next = 0u64;
    for _ in 0..rng.random_range(0..=p.max_existing) {
        let f = rng.random_range(1..=p.max_span.min(rows));
        let td = rng.random_range(1..=p.max_span.min(cols));
        let pl = Placement::new(
            NetworkId(next),
            rng.random_range(0..=rows - f),
            rng.random_range(0..=cols - td),
            f,
            td,
        );
        if grid.place(&pl).is_ok() {
            existing.push(EmbedRequest::existing(rng.random_range(1..=p.levels), 0, pl));
            next += 1;
        }
    }
    let mut levels = vec![Vec::new(); p.levels as usize];
    for _ in 0..rng.random_range(0..=p.max_requests) {
        let f = rng.random_range(1..=p.max_span.min(rows));
        let td = rng.random_range(1..=p.max_span.min(cols));
        let prio = rng.random_range(1..=p.levels);
        levels[prio as usize - 1].push(EmbedRequest::new_request(
            NetworkId(next),
            prio,
            f,
            td,
            rng.random_range(0..3),
        ));
        next += 1;
    }
    Instance {
        dims: p.dims,
        existing,
        levels,
    }
}

/// Revenue of each heuristic next to the optimum it is compared with.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceOutcome {
    pub heuristics: Vec<(EmbedderMode, f64, f64)>,
    pub violations: Vec<String>,
}

/// Checks one instance: feasibility of every layout, and each heuristic's
/// revenue against the optimum of the same flavour (static KM against the
/// static optimum, the dynamic heuristics against the dynamic optimum).
pub fn check_instance(inst: &Instance, costs: &PriorityCosts) -> Result<InstanceOutcome, EmbedError> {
    let flat: Vec<EmbedRequest> = inst.levels.iter().flatten().copied().collect();
    let all: Vec<EmbedRequest> = inst.existing.iter().chain(&flat).copied().collect();
    let mut violations = Vec::new();
    let check = |violations: &mut Vec<String>, what: &str, r: Result<(), Violation>| {
        if let Err(v) = r {
            violations.push(format!("{what}: {v}"));
        }
    };
    let opt_s = embed_exact(inst.dims, &inst.existing, &inst.levels, ExactMode::Static, costs)?;
    let opt_d = embed_exact(inst.dims, &inst.existing, &inst.levels, ExactMode::Dynamic, costs)?;
    check(
        &mut violations,
        "exact-static",
        verify_stage_result(inst.dims, &inst.existing, &flat, &opt_s.result, true),
    );
    check(
        &mut violations,
        "exact-dynamic",
        verify_stage_result(inst.dims, &inst.existing, &flat, &opt_d.result, false),
    );

    let mut heuristics = Vec::new();
    for mode in EmbedderMode::HEURISTICS {
        let res = embed_with_mode(
            mode,
            inst.dims,
            &inst.existing,
            &inst.levels,
            costs,
            DEFAULT_COMBINATION_CAP,
        )?;
        check(
            &mut violations,
            mode.name(),
            verify_stage_result(inst.dims, &inst.existing, &flat, &res, mode.is_static()),
        );
        let revenue = layout_revenue(&res.placements, &all, costs);
        let optimum = if mode.is_static() {
            opt_s.objective
        } else {
            opt_d.objective
        };
        if revenue > optimum + 1e-9 {
            violations.push(format!("{mode}: revenue {revenue} exceeds optimum {optimum}"));
        }
        heuristics.push((mode, revenue, optimum));
    }
    Ok(InstanceOutcome { heuristics, violations })
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub instances: usize,
    /// `(instance index, description)`.
    pub violations: Vec<(usize, String)>,
    /// Mean heuristic / optimal revenue per heuristic, over instances with a
    /// positive optimum.
    pub ratios: Vec<(EmbedderMode, Option<f64>)>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn render(&self) -> String {
        let mut s = format!("{} instances, {} violations\n", self.instances, self.violations.len());
        for (mode, r) in &self.ratios {
            let _ = writeln!(
                s,
                "{mode}: mean revenue / optimum = {}",
                r.map_or("n/a".into(), |r| format!("{r:.4}"))
            );
        }
        for (k, v) in &self.violations {
            let _ = writeln!(s, "instance {k}: {v}");
        }
        s
    }
}

pub fn run_oracle_check(p: &OracleParams) -> Result<OracleReport, OracleError> {
    if p.dims.f_blocks() > MAX_SIDE || p.dims.t_blocks() > MAX_SIDE {
        return Err(OracleError::TooLarge(p.dims.f_blocks(), p.dims.t_blocks()));
    }
    if p.max_requests > MAX_REQUESTS || p.max_existing > MAX_EXISTING {
        return Err(OracleError::TooManyRequests);
    }
    if !(1..=3).contains(&p.levels) {
        return Err(OracleError::Levels(p.levels));
    }
    if p.max_span == 0 {
        return Err(OracleError::Span);
    }
    let costs = costs_for(p.levels);
    let mut rng = ChaCha20Rng::seed_from_u64(p.seed);
    let mut violations = Vec::new();
    let mut sums = vec![(0.0, 0usize); EmbedderMode::HEURISTICS.len()];
    for k in 0..p.instances {
        let inst = random_instance(&mut rng, p);
        match check_instance(&inst, &costs) {
            Ok(out) => {
                violations.extend(out.violations.into_iter().map(|v| (k, v)));
                for (slot, (_, rev, opt)) in sums.iter_mut().zip(&out.heuristics) {
                    if *opt > 0.0 {
                        slot.0 += rev / opt;
                        slot.1 += 1;
                    }
                }
            }
            Err(e) => violations.push((k, format!("embedder error: {e}"))),
        }
    }
    let ratios = EmbedderMode::HEURISTICS
        .iter()
        .zip(sums)
        .map(|(&m, (s, n))| (m, (n > 0).then(|| s / n as f64)))
        .collect();
    Ok(OracleReport {
        instances: p.instances,
        violations,
        ratios,
    })
}
