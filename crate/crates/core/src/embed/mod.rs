//! Embedding strategies for one slot.
//!
//! Every strategy receives the networks already running (stage 0) and the
//! buffered requests, and returns a [`StageResult`]: placements for every
//! existing network plus the subset of new requests that could be embedded.

mod check;
mod combinations;
mod exact;
mod greedy;
mod km;

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::grid::{GridError, NetworkId, Placement, SubstrateDims};
use crate::pricing::PriorityCosts;

pub use check::{verify_stage_result, Violation};
pub use combinations::{enumerate_combinations, Combinations};
pub use exact::{embed_exact, ExactMode, ExactSolution};
pub use greedy::{embed_dynamic_greedy, embed_dynamic_greedy_with};
pub use km::{embed_dynamic_km, embed_static_km};

/// Default per-level request cap for combination enumeration (4095 subsets).
pub const DEFAULT_COMBINATION_CAP: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RequestKind {
    /// Buffered request not yet embedded.
    New,
    /// Running network together with where it sits right now.
    Existing { previous: Placement },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbedRequest {
    pub network_id: NetworkId,
    /// 1 is the highest priority.
    pub priority: u32,
    pub f: usize,
    pub td: usize,
    /// Slot in which the request arrived; used for ordering ties.
    pub arrival_slot: u64,
    pub kind: RequestKind,
}

impl EmbedRequest {
    pub fn new_request(network_id: NetworkId, priority: u32, f: usize, td: usize, arrival_slot: u64) -> Self {
        Self {
            network_id,
            priority,
            f,
            td,
            arrival_slot,
            kind: RequestKind::New,
        }
    }

    /// A running network at `previous`; spans come from the placement.
    pub fn existing(priority: u32, arrival_slot: u64, previous: Placement) -> Self {
        Self {
            network_id: previous.network_id,
            priority,
            f: previous.f,
            td: previous.td,
            arrival_slot,
            kind: RequestKind::Existing { previous },
        }
    }

    #[inline]
    pub fn area(&self) -> usize {
        self.f * self.td
    }

    pub fn previous(&self) -> Option<&Placement> {
        match &self.kind {
            RequestKind::Existing { previous } => Some(previous),
            RequestKind::New => None,
        }
    }

    /// Same request, now running at `placement`.
    pub(crate) fn embedded_at(&self, placement: Placement) -> Self {
        Self {
            kind: RequestKind::Existing { previous: placement },
            ..*self
        }
    }
}

/// Outcome of embedding one slot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StageResult {
    /// Placements of all networks running after this slot's embedding,
    /// existing ones included, sorted by network id.
    pub placements: Vec<Placement>,
    /// New requests that were embedded.
    pub embedded_ids: Vec<NetworkId>,
    /// New requests left in the buffer.
    pub deferred_ids: Vec<NetworkId>,
    /// How many times re-embedding of existing networks failed and the
    /// previous layout was kept instead.
    pub reembed_failures: u32,
    /// Levels whose request count exceeded the combination cap.
    pub combination_fallbacks: u32,
}

impl StageResult {
    pub fn placement_of(&self, id: NetworkId) -> Option<&Placement> {
        self.placements.iter().find(|p| p.network_id == id)
    }

    pub(crate) fn normalize(mut self) -> Self {
        self.placements.sort_by_key(|p| p.network_id);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EmbedError {
    #[error("invalid embedder input: {0}")]
    InvalidState(&'static str),
    #[error("existing networks overlap or leave the substrate: {0}")]
    ExistingConflict(#[from] GridError),
    #[error("existing networks cannot all be embedded")]
    Infeasible,
    #[error("priority {priority} of network {id} is outside 1..={levels}")]
    BadPriority {
        id: NetworkId,
        priority: u32,
        levels: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmbedderMode {
    StaticKm,
    DynamicKm,
    DynamicGreedy,
    ExactStatic,
    ExactDynamic,
}

impl EmbedderMode {
    pub const HEURISTICS: [EmbedderMode; 3] = [Self::StaticKm, Self::DynamicKm, Self::DynamicGreedy];
    pub const ALL: [EmbedderMode; 5] = [
        Self::StaticKm,
        Self::DynamicKm,
        Self::DynamicGreedy,
        Self::ExactStatic,
        Self::ExactDynamic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::StaticKm => "static-km",
            Self::DynamicKm => "dynamic-km",
            Self::DynamicGreedy => "dynamic-greedy",
            Self::ExactStatic => "exact-static",
            Self::ExactDynamic => "exact-dynamic",
        }
    }

    /// Whether running networks keep their cells for life.
    pub fn is_static(&self) -> bool {
        matches!(self, Self::StaticKm | Self::ExactStatic)
    }
}

impl fmt::Display for EmbedderMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("unknown embedder mode `{0}`")]
pub struct UnknownMode(pub alloc::string::String);

impl FromStr for EmbedderMode {
    type Err = UnknownMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| UnknownMode(s.into()))
    }
}

/// Dispatches one slot's embedding to the strategy named by `mode`.
///
/// `new_by_priority[k]` holds the buffered requests of priority `k + 1`.
pub fn embed_with_mode(
    mode: EmbedderMode,
    dims: SubstrateDims,
    existing: &[EmbedRequest],
    new_by_priority: &[Vec<EmbedRequest>],
    costs: &PriorityCosts,
    combination_cap: usize,
) -> Result<StageResult, EmbedError> {
    match mode {
        EmbedderMode::StaticKm | EmbedderMode::DynamicKm => {
            let flat: Vec<EmbedRequest> = new_by_priority.iter().flatten().copied().collect();
            if mode == EmbedderMode::StaticKm {
                embed_static_km(dims, existing, &flat)
            } else {
                embed_dynamic_km(dims, existing, &flat)
            }
        }
        EmbedderMode::DynamicGreedy => embed_dynamic_greedy(dims, existing, new_by_priority, combination_cap),
        EmbedderMode::ExactStatic => {
            embed_exact(dims, existing, new_by_priority, ExactMode::Static, costs).map(|s| s.result)
        }
        EmbedderMode::ExactDynamic => {
            embed_exact(dims, existing, new_by_priority, ExactMode::Dynamic, costs).map(|s| s.result)
        }
    }
}

/// Revenue of a slot layout: Σ cost(priority) × area over embedded networks.
pub fn layout_revenue<'a>(
    placements: &[Placement],
    requests: impl IntoIterator<Item = &'a EmbedRequest>,
    costs: &PriorityCosts,
) -> f64 {
    requests
        .into_iter()
        .filter(|r| placements.iter().any(|p| p.network_id == r.network_id))
        .map(|r| costs.cost(r.priority) * r.area() as f64)
        .fold(0.0, |acc, v| acc + v)
}

/// High priority first, then larger area, then earlier arrival, then id.
pub(crate) fn new_request_order(a: &EmbedRequest, b: &EmbedRequest) -> core::cmp::Ordering {
    a.priority
        .cmp(&b.priority)
        .then(b.area().cmp(&a.area()))
        .then(a.arrival_slot.cmp(&b.arrival_slot))
        .then(a.network_id.cmp(&b.network_id))
}

/// Larger area first, then id.
pub(crate) fn existing_order(a: &EmbedRequest, b: &EmbedRequest) -> core::cmp::Ordering {
    b.area().cmp(&a.area()).then(a.network_id.cmp(&b.network_id))
}

pub(crate) fn require_existing(existing: &[EmbedRequest]) -> Result<Vec<Placement>, EmbedError> {
    existing
        .iter()
        .map(|r| match r.kind {
            RequestKind::Existing { previous } if previous.network_id == r.network_id => Ok(previous),
            RequestKind::Existing { .. } => Err(EmbedError::InvalidState("existing placement id mismatch")),
            RequestKind::New => Err(EmbedError::InvalidState("existing entry without a placement")),
        })
        .collect()
}
