//! Request workload: Poisson arrivals with uniform sizes and priorities and
//! exponential lifespans rounded up to whole slots.
//!
//! Randomness comes from ChaCha20 (`rand_chacha::ChaCha20Rng`). The master
//! seed is expanded with `seed_from_u64`, and each attribute draws from its
//! own ChaCha stream of that key (see [`Stream`]), so changing one
//! distribution never shifts the samples of another.

use alloc::vec;
use alloc::vec::Vec;

use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp, Poisson};
use thiserror::Error;

use crate::grid::{NetworkId, SubstrateDims};

/// One virtual network request `(p, f, td, d)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VnRequest {
    pub id: NetworkId,
    pub arrival_slot: u64,
    /// 1 is the highest priority.
    pub priority: u32,
    pub f: usize,
    pub td: usize,
    /// Lifetime in slots, at least 1.
    pub duration: u32,
}

impl VnRequest {
    #[inline]
    pub fn area(&self) -> usize {
        self.f * self.td
    }

    /// Resource-time weight `area × duration`.
    #[inline]
    pub fn weight(&self) -> u64 {
        self.area() as u64 * self.duration as u64
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum TrafficError {
    #[error("arrival rate must be positive and finite, got {0}")]
    Rate(f64),
    #[error("mean lifespan must be at least one slot, got {0}")]
    Lifespan(f64),
    #[error("at least one priority level is required")]
    NoLevels,
    #[error("{axis} range {lo}..={hi} is empty or outside 1..={limit}")]
    Range {
        axis: &'static str,
        lo: usize,
        hi: usize,
        limit: usize,
    },
    #[error("request {id}: {reason}")]
    InvalidRequest { id: NetworkId, reason: &'static str },
    #[error("request {0} appears more than once")]
    DuplicateId(NetworkId),
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrafficConfig {
    pub dims: SubstrateDims,
    /// Mean arrivals per slot.
    pub lambda: f64,
    /// Mean lifespan in slots.
    pub mu: f64,
    pub priority_levels: u32,
    /// Inclusive frequency span range.
    pub f_range: (usize, usize),
    /// Inclusive time span range.
    pub td_range: (usize, usize),
    pub horizon: u64,
    pub seed: u64,
}

impl TrafficConfig {
    /// 12×12 substrate, λ = 3, μ = 10, three priorities, spans U(1, 3), 1000 slots.
    pub fn default_scenario(seed: u64) -> Self {
        Self {
            dims: SubstrateDims::new(12, 12).expect("nonzero"),
            lambda: 3.0,
            mu: 10.0,
            priority_levels: 3,
            f_range: (1, 3),
            td_range: (1, 3),
            horizon: 1000,
            seed,
        }
    }

    /// Spans U(2, 5) with λ = 1.
    pub fn large_scenario(seed: u64) -> Self {
        Self {
            lambda: 1.0,
            f_range: (2, 5),
            td_range: (2, 5),
            ..Self::default_scenario(seed)
        }
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(TrafficError::Rate(self.lambda));
        }
        if !(self.mu.is_finite() && self.mu >= 1.0) {
            return Err(TrafficError::Lifespan(self.mu));
        }
        if self.priority_levels == 0 {
            return Err(TrafficError::NoLevels);
        }
        let check = |axis, (lo, hi): (usize, usize), limit| {
            if lo == 0 || lo > hi || hi > limit {
                Err(TrafficError::Range { axis, lo, hi, limit })
            } else {
                Ok(())
            }
        };
        check("frequency", self.f_range, self.dims.f_blocks())?;
        check("time", self.td_range, self.dims.t_blocks())?;
        Ok(())
    }
}

/// Header fields echoed into every trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TraceHeader {
    pub dims: SubstrateDims,
    pub priority_levels: u32,
    pub seed: u64,
    pub horizon: u64,
}

/// Requests bucketed by arrival slot, sorted by `(arrival_slot, id)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trace {
    header: TraceHeader,
    slots: Vec<Vec<VnRequest>>,
}

impl Trace {
    /// Validates and buckets `requests`. Requests arriving at or after the
    /// horizon are rejected.
    pub fn new(header: TraceHeader, mut requests: Vec<VnRequest>) -> Result<Self, TrafficError> {
        requests.sort_by_key(|r| (r.arrival_slot, r.id));
        let mut ids: Vec<NetworkId> = requests.iter().map(|r| r.id).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(TrafficError::DuplicateId(w[0]));
        }
        let mut slots = vec![Vec::new(); header.horizon as usize];
        for r in requests {
            let bad = |reason| TrafficError::InvalidRequest { id: r.id, reason };
            if r.duration == 0 {
                return Err(bad("duration must be at least 1"));
            }
            if r.priority == 0 || r.priority > header.priority_levels {
                return Err(bad("priority outside 1..=K"));
            }
            if r.f == 0 || r.f > header.dims.f_blocks() || r.td == 0 || r.td > header.dims.t_blocks() {
                return Err(bad("spans outside the substrate"));
            }
            if r.arrival_slot >= header.horizon {
                return Err(bad("arrival slot beyond the horizon"));
            }
            slots[r.arrival_slot as usize].push(r);
        }
        Ok(Self { header, slots })
    }

    #[inline]
    pub fn header(&self) -> &TraceHeader {
        &self.header
    }

    /// Arrivals of slot `t`; empty beyond the horizon.
    pub fn arrivals(&self, t: u64) -> &[VnRequest] {
        self.slots.get(t as usize).map_or(&[], Vec::as_slice)
    }

    pub fn slots(&self) -> &[Vec<VnRequest>] {
        &self.slots
    }

    pub fn requests(&self) -> impl Iterator<Item = &VnRequest> {
        self.slots.iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.slots.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// ChaCha stream ids, one per sampled attribute.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum Stream {
    Arrivals = 0,
    Frequency = 1,
    Time = 2,
    Priority = 3,
    Duration = 4,
}

fn stream(seed: u64, s: Stream) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(s as u64);
    rng
}

/// Samples a trace. Identical configurations give identical traces.
pub fn generate_trace(config: &TrafficConfig) -> Result<Trace, TrafficError> {
    config.validate()?;
    let arrivals = Poisson::new(config.lambda).map_err(|_| TrafficError::Rate(config.lambda))?;
    let lifespan = Exp::new(1.0 / config.mu).map_err(|_| TrafficError::Lifespan(config.mu))?;

    let mut arrival_rng = stream(config.seed, Stream::Arrivals);
    let mut f_rng = stream(config.seed, Stream::Frequency);
    let mut td_rng = stream(config.seed, Stream::Time);
    let mut p_rng = stream(config.seed, Stream::Priority);
    let mut d_rng = stream(config.seed, Stream::Duration);

    let mut requests = Vec::new();
    let mut next_id = 0u64;
    for slot in 0..config.horizon {
        let count: f64 = arrivals.sample(&mut arrival_rng);
        for _ in 0..count as u64 {
            let f = f_rng.random_range(config.f_range.0..=config.f_range.1);
            let td = td_rng.random_range(config.td_range.0..=config.td_range.1);
            let priority = p_rng.random_range(1..=config.priority_levels);
            let life: f64 = lifespan.sample(&mut d_rng);
            let duration = (Float::ceil(life) as u32).max(1);
            requests.push(VnRequest {
                id: NetworkId(next_id),
                arrival_slot: slot,
                priority,
                f,
                td,
                duration,
            });
            next_id += 1;
        }
    }
    let header = TraceHeader {
        dims: config.dims,
        priority_levels: config.priority_levels,
        seed: config.seed,
        horizon: config.horizon,
    };
    Trace::new(header, requests)
}
