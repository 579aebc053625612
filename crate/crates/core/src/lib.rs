//! Embedding of prioritised virtual wireless networks onto a frequency × time
//! resource grid.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only pure
//! computation:
//!
//! - [`grid`]: occupancy grids, maximal vacant rectangles and the embedding
//!   density index used to choose placement corners;
//! - [`embed`]: static and dynamic Karnaugh-map embedding, the dynamic greedy
//!   combination search, and an exhaustive staged optimum for small
//!   instances;
//! - [`traffic`]: seeded request workloads;
//! - [`sim`]: the per-slot control loop with revenue and rejection metrics.
//!
//! File formats, configuration and the command-line runner live in the
//! `vne-sim` crate.
#![no_std]

extern crate alloc;

pub mod embed;
pub mod grid;
pub mod pricing;
pub mod sim;
pub mod traffic;

pub use embed::{EmbedRequest, EmbedderMode, StageResult};
pub use grid::{NetworkId, OccupancyGrid, Placement, SubstrateDims, VacantRegion};
pub use pricing::PriorityCosts;
pub use sim::{SimParams, SimulationSummary, TimeslotMetrics};
pub use traffic::{Trace, TrafficConfig, VnRequest};
