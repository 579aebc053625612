//! Constraint checker for a slot's embedding, written against the raw cell
//! array so it shares no code with the embedders it checks.

use alloc::vec;
use alloc::vec::Vec;

use thiserror::Error;

use super::{EmbedRequest, StageResult};
use crate::grid::{NetworkId, SubstrateDims};

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("running network {0} was dropped")]
    ExistingDropped(NetworkId),
    #[error("network {0} has more than one start position")]
    MultiplePlacements(NetworkId),
    #[error("placement for unknown network {0}")]
    UnknownPlacement(NetworkId),
    #[error("cell ({i},{j}) is used by {count} networks")]
    Overlap { i: usize, j: usize, count: usize },
    #[error("network {0} does not keep its requested shape or leaves the substrate")]
    Shape(NetworkId),
    #[error("running network {0} moved under static embedding")]
    Moved(NetworkId),
    #[error("new request {0} is not reported exactly once as embedded or deferred")]
    Bookkeeping(NetworkId),
}

/// Checks the mandatory-existing, optional-new, no-overlap and shape
/// constraints, plus position stability of running networks when
/// `static_mode` is set.
pub fn verify_stage_result(
    dims: SubstrateDims,
    existing: &[EmbedRequest],
    new_requests: &[EmbedRequest],
    result: &StageResult,
    static_mode: bool,
) -> Result<(), Violation> {
    let rows = dims.f_blocks();
    let cols = dims.t_blocks();
    let all: Vec<&EmbedRequest> = existing.iter().chain(new_requests).collect();

    for p in &result.placements {
        let count = result
            .placements
            .iter()
            .filter(|q| q.network_id == p.network_id)
            .count();
        if count > 1 {
            return Err(Violation::MultiplePlacements(p.network_id));
        }
        let req = all
            .iter()
            .find(|r| r.network_id == p.network_id)
            .ok_or(Violation::UnknownPlacement(p.network_id))?;
        if p.f != req.f || p.td != req.td || p.origin_i + p.f > rows || p.origin_j + p.td > cols {
            return Err(Violation::Shape(p.network_id));
        }
    }

    for r in existing {
        let placed = result
            .placements
            .iter()
            .find(|p| p.network_id == r.network_id)
            .ok_or(Violation::ExistingDropped(r.network_id))?;
        if static_mode && Some(placed) != r.previous() {
            return Err(Violation::Moved(r.network_id));
        }
    }

    for r in new_requests {
        let placed = result.placements.iter().any(|p| p.network_id == r.network_id);
        let embedded = result.embedded_ids.iter().filter(|id| **id == r.network_id).count();
        let deferred = result.deferred_ids.iter().filter(|id| **id == r.network_id).count();
        let consistent = if placed {
            embedded == 1 && deferred == 0
        } else {
            embedded == 0 && deferred == 1
        };
        if !consistent {
            return Err(Violation::Bookkeeping(r.network_id));
        }
    }

    let mut usage = vec![0usize; rows * cols];
    for p in &result.placements {
        for i in p.origin_i..p.origin_i + p.f {
            for j in p.origin_j..p.origin_j + p.td {
                usage[i * cols + j] += 1;
            }
        }
    }
    if let Some(k) = usage.iter().position(|&c| c > 1) {
        return Err(Violation::Overlap {
            i: k / cols,
            j: k % cols,
            count: usage[k],
        });
    }
    Ok(())
}
