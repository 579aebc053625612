//! Dynamic greedy combination embedding.
//!
//! Per priority level, every subset of that level's requests is joined with
//! the combination already fixed by the higher stages. Candidates that fit
//! the substrate by area are tried largest-first with an inner embedder
//! until one packs completely. The empty subset is always tried last and
//! always succeeds, so each level terminates.

use alloc::vec;
use alloc::vec::Vec;

use super::combinations::{enumerate_combinations, Combinations};
use super::{embed_dynamic_km, require_existing, EmbedError, EmbedRequest, StageResult};
use crate::grid::SubstrateDims;

/// Packs a set of running networks plus new requests in one slot.
pub trait SlotEmbedder {
    fn embed(
        &self,
        dims: SubstrateDims,
        existing: &[EmbedRequest],
        new_requests: &[EmbedRequest],
    ) -> Result<StageResult, EmbedError>;
}

/// [`embed_dynamic_km`] as a [`SlotEmbedder`].
#[derive(Clone, Copy, Debug, Default)]
pub struct DynamicKm;

impl SlotEmbedder for DynamicKm {
    fn embed(
        &self,
        dims: SubstrateDims,
        existing: &[EmbedRequest],
        new_requests: &[EmbedRequest],
    ) -> Result<StageResult, EmbedError> {
        embed_dynamic_km(dims, existing, new_requests)
    }
}

/// Greedy combination embedding with dynamic KM as the inner packer.
pub fn embed_dynamic_greedy(
    dims: SubstrateDims,
    existing: &[EmbedRequest],
    new_by_priority: &[Vec<EmbedRequest>],
    combination_cap: usize,
) -> Result<StageResult, EmbedError> {
    embed_dynamic_greedy_with(&DynamicKm, dims, existing, new_by_priority, combination_cap)
}

pub fn embed_dynamic_greedy_with<E: SlotEmbedder>(
    inner: &E,
    dims: SubstrateDims,
    existing: &[EmbedRequest],
    new_by_priority: &[Vec<EmbedRequest>],
    combination_cap: usize,
) -> Result<StageResult, EmbedError> {
    require_existing(existing)?;
    let capacity = dims.capacity();
    let mut combination: Vec<EmbedRequest> = existing.to_vec();
    let mut embedded_ids = Vec::new();
    let mut reembed_failures = 0;
    let mut combination_fallbacks = 0;

    let no_levels: [Vec<EmbedRequest>; 1] = [Vec::new()];
    let levels = if new_by_priority.is_empty() {
        &no_levels[..]
    } else {
        new_by_priority
    };

    for level in levels {
        let base_area: usize = combination.iter().map(EmbedRequest::area).sum();
        let accepted = match enumerate_combinations(level.len(), combination_cap) {
            Combinations::Exceeded { .. } => {
                combination_fallbacks += 1;
                inner.embed(dims, &combination, level)?
            }
            Combinations::Subsets(subsets) => {
                let mut candidates: Vec<(usize, Vec<usize>)> = subsets
                    .into_iter()
                    .filter(|s| s.iter().all(|&i| dims.fits(level[i].f, level[i].td)))
                    .map(|s| (s.iter().map(|&i| level[i].area()).sum::<usize>(), s))
                    .filter(|(area, _)| base_area + area <= capacity)
                    .collect();
                // largest total area first; on equal area prefer more requests
                candidates.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.len().cmp(&a.1.len())));
                candidates.push((0, vec![]));

                let mut found = None;
                for (_, subset) in &candidates {
                    let members: Vec<EmbedRequest> = subset.iter().map(|&i| level[i]).collect();
                    let res = inner.embed(dims, &combination, &members)?;
                    if res.deferred_ids.is_empty() {
                        found = Some(res);
                        break;
                    }
                }
                found.ok_or(EmbedError::InvalidState(
                    "inner embedder rejected the empty combination",
                ))?
            }
        };

        reembed_failures += accepted.reembed_failures;
        let mut next = Vec::with_capacity(combination.len() + accepted.embedded_ids.len());
        for r in combination
            .iter()
            .chain(level.iter().filter(|r| accepted.embedded_ids.contains(&r.network_id)))
        {
            let placement = accepted
                .placement_of(r.network_id)
                .copied()
                .ok_or(EmbedError::InvalidState("inner embedder dropped a running network"))?;
            next.push(r.embedded_at(placement));
        }
        embedded_ids.extend(accepted.embedded_ids.iter().copied());
        combination = next;
    }

    let deferred_ids = new_by_priority
        .iter()
        .flatten()
        .map(|r| r.network_id)
        .filter(|id| !embedded_ids.contains(id))
        .collect();
    Ok(StageResult {
        placements: combination.iter().filter_map(|r| r.previous().copied()).collect(),
        embedded_ids,
        deferred_ids,
        reembed_failures,
        combination_fallbacks,
    }
    .normalize())
}
