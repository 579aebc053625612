//! Slotted control loop: expiry, buffering with per-priority maximum delay,
//! embedding, and revenue / rejection metrics.
//!
//! Each slot runs, in order:
//! 1. decrement the remaining lifetime of running networks and release
//!    those that reach zero;
//! 2. append the slot's arrivals to the buffer;
//! 3. embed running networks and buffered requests with the chosen mode;
//! 4. turn embedded requests into running networks with `remaining = d`;
//! 5. age the requests left in the buffer and reject those whose wait has
//!    reached `max_delay[p]`;
//! 6. record metrics.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use crate::embed::{embed_with_mode, EmbedError, EmbedRequest, EmbedderMode, DEFAULT_COMBINATION_CAP};
use crate::grid::{NetworkId, OccupancyGrid, Placement, SubstrateDims};
use crate::pricing::PriorityCosts;
use crate::traffic::{Trace, VnRequest};

#[derive(Clone, Debug, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error("invalid simulation parameters: {0}")]
    Params(&'static str),
    #[error("request {id} has priority {priority} but only {levels} levels are configured")]
    Priority {
        id: NetworkId,
        priority: u32,
        levels: usize,
    },
    #[error("trace substrate does not match the simulation substrate")]
    DimsMismatch,
    #[error("embedder lost running network {0}")]
    LostNetwork(NetworkId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BufferEntry {
    pub request: VnRequest,
    pub slots_waited: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActiveNetwork {
    pub request: VnRequest,
    pub placement: Placement,
    /// Slots left including the current one.
    pub remaining: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Accepted,
    Rejected,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimParams {
    pub dims: SubstrateDims,
    pub mode: EmbedderMode,
    pub costs: PriorityCosts,
    /// Maximum buffer wait per priority, index 0 = priority 1.
    pub max_delays: Vec<u32>,
    pub combination_cap: usize,
}

impl SimParams {
    /// 12×12 substrate, costs (0.5, 0.3, 0.2), max delays (1, 2, 3).
    pub fn default_scenario(mode: EmbedderMode) -> Self {
        Self {
            dims: SubstrateDims::new(12, 12).expect("nonzero"),
            mode,
            costs: PriorityCosts::three_level_default(),
            max_delays: vec![1, 2, 3],
            combination_cap: DEFAULT_COMBINATION_CAP,
        }
    }

    pub fn priority_levels(&self) -> usize {
        self.costs.levels()
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.max_delays.len() != self.costs.levels() {
            return Err(SimError::Params("one max delay per priority level is required"));
        }
        if self.max_delays.contains(&0) {
            return Err(SimError::Params("max delay must be at least one slot"));
        }
        Ok(())
    }
}

/// Per-slot outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeslotMetrics {
    pub slot: u64,
    pub revenue: f64,
    /// `None` when no request was resolved in this slot.
    pub rejection_rate: Option<f64>,
    pub accepted: Vec<NetworkId>,
    pub rejected: Vec<NetworkId>,
    /// Requests still waiting in the buffer after this slot.
    pub deferred: usize,
    pub occupancy: f64,
    pub reembed_failures: u32,
    /// Σ area × duration of resolved requests, per priority.
    pub resolved_weight: Vec<u64>,
    /// Σ area × duration of rejected requests, per priority.
    pub rejected_weight: Vec<u64>,
}

impl TimeslotMetrics {
    pub fn priority_rejection_rate(&self, priority: u32) -> Option<f64> {
        let k = priority as usize - 1;
        let den = *self.resolved_weight.get(k)?;
        (den > 0).then(|| self.rejected_weight[k] as f64 / den as f64)
    }
}

/// Slot revenue over the running networks: `Σ cost(p) · f · td`.
pub fn revenue_of_slot(active: &[ActiveNetwork], costs: &PriorityCosts) -> f64 {
    active
        .iter()
        .map(|a| costs.cost(a.request.priority) * a.request.area() as f64)
        .fold(0.0, |acc, v| acc + v)
}

/// Rejected share of the resource-time (`area × duration`) of every request
/// resolved in the slot. `None` when nothing was resolved.
pub fn rejection_rate_of_slot(resolved: &[(VnRequest, Outcome)]) -> Option<f64> {
    let total: u64 = resolved.iter().map(|(r, _)| r.weight()).sum();
    let rejected: u64 = resolved
        .iter()
        .filter(|(_, o)| *o == Outcome::Rejected)
        .map(|(r, _)| r.weight())
        .sum();
    (total > 0).then(|| rejected as f64 / total as f64)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimState {
    slot: u64,
    active: Vec<ActiveNetwork>,
    buffer: Vec<BufferEntry>,
}

impl SimState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of the next slot to run.
    pub fn slot(&self) -> u64 {
        self.slot
    }

    pub fn active(&self) -> &[ActiveNetwork] {
        &self.active
    }

    pub fn buffer(&self) -> &[BufferEntry] {
        &self.buffer
    }

    pub fn grid(&self, dims: SubstrateDims) -> OccupancyGrid {
        OccupancyGrid::from_placements(dims, self.active.iter().map(|a| &a.placement))
            .expect("running networks never overlap")
    }

    /// Runs one slot with `arrivals` joining the buffer.
    pub fn step(&mut self, params: &SimParams, arrivals: &[VnRequest]) -> Result<TimeslotMetrics, SimError> {
        let levels = params.priority_levels();
        for r in arrivals {
            if r.priority == 0 || r.priority as usize > levels {
                return Err(SimError::Priority {
                    id: r.id,
                    priority: r.priority,
                    levels,
                });
            }
        }

        for a in &mut self.active {
            a.remaining -= 1;
        }
        self.active.retain(|a| a.remaining > 0);
        self.buffer.extend(arrivals.iter().map(|&request| BufferEntry {
            request,
            slots_waited: 0,
        }));

        let existing: Vec<EmbedRequest> = self
            .active
            .iter()
            .map(|a| EmbedRequest::existing(a.request.priority, a.request.arrival_slot, a.placement))
            .collect();
        let mut new_by_priority = vec![Vec::new(); levels];
        for e in &self.buffer {
            let r = &e.request;
            new_by_priority[r.priority as usize - 1].push(EmbedRequest::new_request(
                r.id,
                r.priority,
                r.f,
                r.td,
                r.arrival_slot,
            ));
        }
        let result = embed_with_mode(
            params.mode,
            params.dims,
            &existing,
            &new_by_priority,
            &params.costs,
            params.combination_cap,
        )?;

        for a in &mut self.active {
            a.placement = *result
                .placement_of(a.request.id)
                .ok_or(SimError::LostNetwork(a.request.id))?;
        }

        let mut resolved_weight = vec![0u64; levels];
        let mut rejected_weight = vec![0u64; levels];
        let mut resolved = Vec::new();
        let mut accepted = Vec::new();
        let mut rejected = Vec::new();
        let mut waiting = Vec::with_capacity(self.buffer.len());
        for mut e in self.buffer.drain(..) {
            let k = e.request.priority as usize - 1;
            if let Some(p) = result.placement_of(e.request.id) {
                self.active.push(ActiveNetwork {
                    request: e.request,
                    placement: *p,
                    remaining: e.request.duration,
                });
                accepted.push(e.request.id);
                resolved_weight[k] += e.request.weight();
                resolved.push((e.request, Outcome::Accepted));
                continue;
            }
            e.slots_waited += 1;
            if e.slots_waited >= params.max_delays[k] {
                rejected.push(e.request.id);
                resolved_weight[k] += e.request.weight();
                rejected_weight[k] += e.request.weight();
                resolved.push((e.request, Outcome::Rejected));
            } else {
                waiting.push(e);
            }
        }
        self.buffer = waiting;

        let occupied: usize = self.active.iter().map(|a| a.placement.area()).sum();
        let metrics = TimeslotMetrics {
            slot: self.slot,
            revenue: revenue_of_slot(&self.active, &params.costs),
            rejection_rate: rejection_rate_of_slot(&resolved),
            accepted,
            rejected,
            deferred: self.buffer.len(),
            occupancy: occupied as f64 / params.dims.capacity() as f64,
            reembed_failures: result.reembed_failures,
            resolved_weight,
            rejected_weight,
        };
        self.slot += 1;
        Ok(metrics)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    /// Keep stepping past the horizon without arrivals until the buffer is
    /// empty, so every request resolves.
    pub drain: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationSummary {
    pub mode: EmbedderMode,
    pub slots: Vec<TimeslotMetrics>,
    /// Cumulative mean revenue up to and including each slot.
    pub running_revenue: Vec<f64>,
    /// Cumulative mean of the defined per-slot rejection rates.
    pub running_rejection: Vec<Option<f64>>,
    pub mean_revenue: f64,
    pub mean_rejection_rate: Option<f64>,
    pub total_accepted: usize,
    pub total_rejected: usize,
    pub total_reembed_failures: u64,
    /// Mean per-slot rejection rate of each priority (index 0 = priority 1).
    pub priority_rejection: Vec<Option<f64>>,
}

impl SimulationSummary {
    pub fn from_slots(mode: EmbedderMode, levels: usize, slots: Vec<TimeslotMetrics>) -> Self {
        let mut running_revenue = Vec::with_capacity(slots.len());
        let mut running_rejection = Vec::with_capacity(slots.len());
        let (mut rev_sum, mut rej_sum, mut rej_n) = (0.0, 0.0, 0usize);
        for (t, m) in slots.iter().enumerate() {
            rev_sum += m.revenue;
            running_revenue.push(rev_sum / (t + 1) as f64);
            if let Some(r) = m.rejection_rate {
                rej_sum += r;
                rej_n += 1;
            }
            running_rejection.push((rej_n > 0).then(|| rej_sum / rej_n as f64));
        }
        let priority_rejection = (1..=levels as u32)
            .map(|p| mean(slots.iter().filter_map(|m| m.priority_rejection_rate(p))))
            .collect();
        Self {
            mode,
            mean_revenue: running_revenue.last().copied().unwrap_or(0.0),
            mean_rejection_rate: running_rejection.last().copied().flatten(),
            total_accepted: slots.iter().map(|m| m.accepted.len()).sum(),
            total_rejected: slots.iter().map(|m| m.rejected.len()).sum(),
            total_reembed_failures: slots.iter().map(|m| m.reembed_failures as u64).sum(),
            running_revenue,
            running_rejection,
            priority_rejection,
            slots,
        }
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Runs every slot of `trace`.
pub fn run(trace: &Trace, params: &SimParams) -> Result<SimulationSummary, SimError> {
    run_with(trace, params, RunOptions::default())
}

pub fn run_with(trace: &Trace, params: &SimParams, options: RunOptions) -> Result<SimulationSummary, SimError> {
    params.validate()?;
    if trace.header().dims != params.dims {
        return Err(SimError::DimsMismatch);
    }
    let mut state = SimState::new();
    let mut slots = Vec::with_capacity(trace.header().horizon as usize);
    for t in 0..trace.header().horizon {
        slots.push(state.step(params, trace.arrivals(t))?);
    }
    if options.drain {
        while !state.buffer.is_empty() {
            slots.push(state.step(params, &[])?);
        }
    }
    Ok(SimulationSummary::from_slots(
        params.mode,
        params.priority_levels(),
        slots,
    ))
}
