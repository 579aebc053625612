//! Karnaugh-map embedding, static and dynamic.

use alloc::vec::Vec;

use super::{existing_order, new_request_order, require_existing, EmbedError, EmbedRequest, RequestKind, StageResult};
use crate::grid::{km_place, OccupancyGrid, SubstrateDims};

fn sorted_new(new_requests: &[EmbedRequest]) -> Result<Vec<EmbedRequest>, EmbedError> {
    if new_requests.iter().any(|r| r.kind != RequestKind::New) {
        return Err(EmbedError::InvalidState("running network passed as a new request"));
    }
    let mut v = new_requests.to_vec();
    v.sort_by(new_request_order);
    Ok(v)
}

fn place_new(grid: &mut OccupancyGrid, ordered: &[EmbedRequest], out: &mut StageResult) {
    for r in ordered {
        match km_place(grid, r.network_id, r.f, r.td) {
            Some(p) => {
                grid.place(&p).expect("km_place returns a vacant rectangle");
                out.placements.push(p);
                out.embedded_ids.push(r.network_id);
            }
            None => out.deferred_ids.push(r.network_id),
        }
    }
}

/// Existing networks keep their cells; new requests go into the leftover
/// space in priority / decreasing-area order.
pub fn embed_static_km(
    dims: SubstrateDims,
    existing: &[EmbedRequest],
    new_requests: &[EmbedRequest],
) -> Result<StageResult, EmbedError> {
    let previous = require_existing(existing)?;
    let mut grid = OccupancyGrid::from_placements(dims, &previous)?;
    let ordered = sorted_new(new_requests)?;
    let mut out = StageResult {
        placements: previous,
        ..StageResult::default()
    };
    place_new(&mut grid, &ordered, &mut out);
    Ok(out.normalize())
}

/// Re-packs existing networks from an empty substrate (largest first), then
/// places new requests. If the re-pack fails the existing layout is kept and
/// new requests are placed around it, with `reembed_failures = 1`.
pub fn embed_dynamic_km(
    dims: SubstrateDims,
    existing: &[EmbedRequest],
    new_requests: &[EmbedRequest],
) -> Result<StageResult, EmbedError> {
    let previous = require_existing(existing)?;
    let total: usize = existing.iter().map(EmbedRequest::area).sum();
    if total > dims.capacity() {
        return Err(EmbedError::InvalidState("existing networks exceed substrate capacity"));
    }
    // the fallback layout must itself be valid
    OccupancyGrid::from_placements(dims, &previous)?;
    let ordered = sorted_new(new_requests)?;

    let mut running = existing.to_vec();
    running.sort_by(existing_order);

    let mut grid = OccupancyGrid::new(dims);
    let mut out = StageResult::default();
    for r in &running {
        match km_place(&grid, r.network_id, r.f, r.td) {
            Some(p) => {
                grid.place(&p).expect("km_place returns a vacant rectangle");
                out.placements.push(p);
            }
            None => {
                let mut fallback = embed_static_km(dims, existing, new_requests)?;
                fallback.reembed_failures = 1;
                return Ok(fallback);
            }
        }
    }
    place_new(&mut grid, &ordered, &mut out);
    Ok(out.normalize())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{NetworkId, Placement};
    use alloc::vec;

    fn dims(f: usize, t: usize) -> SubstrateDims {
        SubstrateDims::new(f, t).unwrap()
    }

    fn new(id: u64, p: u32, f: usize, td: usize) -> EmbedRequest {
        EmbedRequest::new_request(NetworkId(id), p, f, td, 0)
    }

    fn running(id: u64, i: usize, j: usize, f: usize, td: usize) -> EmbedRequest {
        EmbedRequest::existing(1, 0, Placement::new(NetworkId(id), i, j, f, td))
    }

    #[test]
    fn abc_example_static_defers_c() {
        // B where static KM put it in slot 1, under A's former cells
        let b = running(1, 2, 0, 2, 3);
        let c = new(2, 1, 3, 3);
        let res = embed_static_km(dims(5, 5), &[b], &[c]).unwrap();
        assert_eq!(res.deferred_ids, vec![NetworkId(2)]);
        assert!(res.embedded_ids.is_empty());
        assert_eq!(res.placements, vec![b.previous().copied().unwrap()]);
    }

    #[test]
    fn abc_example_dynamic_accepts_c() {
        let b = running(1, 2, 0, 2, 3);
        let c = new(2, 1, 3, 3);
        let res = embed_dynamic_km(dims(5, 5), &[b], &[c]).unwrap();
        assert_eq!(res.embedded_ids, vec![NetworkId(2)]);
        assert!(res.deferred_ids.is_empty());
        assert_eq!(res.reembed_failures, 0);
        assert_eq!(
            res.placement_of(NetworkId(1)),
            Some(&Placement::new(NetworkId(1), 0, 0, 2, 3))
        );
        assert_eq!(
            res.placement_of(NetworkId(2)),
            Some(&Placement::new(NetworkId(2), 2, 0, 3, 3))
        );
    }

    #[test]
    fn nothing_in_nothing_out() {
        assert_eq!(embed_static_km(dims(4, 4), &[], &[]).unwrap(), StageResult::default());
        assert_eq!(embed_dynamic_km(dims(4, 4), &[], &[]).unwrap(), StageResult::default());
    }

    #[test]
    fn single_request_on_empty_substrate() {
        let res = embed_static_km(dims(12, 12), &[], &[new(0, 2, 3, 3)]).unwrap();
        assert_eq!(res.embedded_ids, vec![NetworkId(0)]);
        let res = embed_dynamic_km(dims(12, 12), &[], &[new(0, 1, 1, 1)]).unwrap();
        let p = res.placements[0];
        assert!([(0, 0), (0, 11), (11, 0), (11, 11)].contains(&(p.origin_i, p.origin_j)));
    }

    #[test]
    fn full_tiling_defers_new_request() {
        let tiles: Vec<_> = (0..4)
            .map(|k| running(k, (k as usize / 2) * 6, (k as usize % 2) * 6, 6, 6))
            .collect();
        let res = embed_dynamic_km(dims(12, 12), &tiles, &[new(9, 1, 1, 1)]).unwrap();
        assert_eq!(res.deferred_ids, vec![NetworkId(9)]);
        assert_eq!(res.placements.len(), 4);
    }

    #[test]
    fn overlapping_existing_is_invalid() {
        let a = running(0, 0, 0, 2, 2);
        let b = running(1, 1, 1, 2, 2);
        assert!(matches!(
            embed_static_km(dims(5, 5), &[a, b], &[]),
            Err(EmbedError::ExistingConflict(_))
        ));
    }

    #[test]
    fn over_capacity_existing_is_invalid() {
        let a = running(0, 0, 0, 3, 3);
        let b = running(1, 0, 0, 3, 3);
        assert!(matches!(
            embed_dynamic_km(dims(4, 4), &[a, b], &[]),
            Err(EmbedError::InvalidState(_))
        ));
    }

    #[test]
    fn new_request_kind_checked() {
        let a = running(0, 0, 0, 1, 1);
        assert!(embed_static_km(dims(3, 3), &[], &[a]).is_err());
        assert!(embed_static_km(dims(3, 3), &[new(1, 1, 1, 1)], &[]).is_err());
    }

    #[test]
    fn failed_repack_keeps_previous_layout() {
        // Largest-first re-pack puts both 2x2 blocks side by side in rows
        // 0-1, after which the 3x1 column no longer fits.
        let d = dims(4, 4);
        let col = running(0, 0, 2, 3, 1);
        let a = running(1, 0, 0, 2, 2);
        let b = running(2, 2, 0, 2, 2);
        let extra = new(3, 1, 1, 1);
        let res = embed_dynamic_km(d, &[col, a, b], &[extra]).unwrap();
        assert_eq!(res.reembed_failures, 1);
        let static_res = embed_static_km(d, &[col, a, b], &[extra]).unwrap();
        assert_eq!(res.placements, static_res.placements);
        for r in [col, a, b] {
            assert_eq!(res.placement_of(r.network_id), r.previous());
        }
        assert_eq!(res.embedded_ids, vec![NetworkId(3)]);
    }

    #[test]
    fn priority_beats_area() {
        // 3x3 substrate: a low-priority 3x3 and a high-priority 1x1
        let res = embed_static_km(dims(3, 3), &[], &[new(0, 2, 3, 3), new(1, 1, 1, 1)]).unwrap();
        assert_eq!(res.embedded_ids, vec![NetworkId(1)]);
        assert_eq!(res.deferred_ids, vec![NetworkId(0)]);
    }
}
