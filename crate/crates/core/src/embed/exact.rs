//! Exhaustive staged optimum for small instances.
//!
//! Stage 0 holds the running networks, which must all stay embedded. Stage
//! `k` then chooses, among the priority-`k` requests, the subset of largest
//! total area that can be packed together with everything fixed by earlier
//! stages. Within a stage every revenue term of a higher stage is constant,
//! so maximising `Σ p_s · area` reduces to maximising the stage's own area.
//!
//! In dynamic mode every earlier network may move; in static mode the
//! running networks are pinned to their current cells. The search is a
//! depth-first branch and bound over start positions in row-major order
//! with "not embedded" tried last, and only strict improvements replace the
//! incumbent, so the lexicographically smallest optimal placement vector is
//! returned.

use alloc::vec;
use alloc::vec::Vec;

use super::{require_existing, EmbedError, EmbedRequest, RequestKind, StageResult};
use crate::grid::{NetworkId, Placement, SubstrateDims};
use crate::pricing::PriorityCosts;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExactMode {
    /// Running networks keep their cells.
    Static,
    /// Running networks may be relocated.
    Dynamic,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExactSolution {
    pub result: StageResult,
    /// Σ cost(priority) × area over every network embedded after the last stage.
    pub objective: f64,
    /// Area embedded at each priority level.
    pub level_areas: Vec<usize>,
}

#[derive(Clone, Copy, Debug)]
struct Item {
    id: NetworkId,
    f: usize,
    td: usize,
    fixed: Option<(usize, usize)>,
    mandatory: bool,
}

impl Item {
    fn area(&self) -> usize {
        self.f * self.td
    }
}

type PositionVector = Vec<Option<(usize, usize)>>;

struct Search<'a> {
    rows: usize,
    cols: usize,
    items: &'a [Item],
    occupied: Vec<bool>,
    free: usize,
    positions: PositionVector,
    area: usize,
    /// Σ area of optional items from index `k` on.
    optional_suffix: Vec<usize>,
    /// Σ area of mandatory items from index `k` on.
    mandatory_suffix: Vec<usize>,
    best: Option<(usize, PositionVector)>,
}

impl<'a> Search<'a> {
    fn new(dims: SubstrateDims, items: &'a [Item]) -> Self {
        let n = items.len();
        let mut optional_suffix = vec![0; n + 1];
        let mut mandatory_suffix = vec![0; n + 1];
        for k in (0..n).rev() {
            let fits = items[k].f <= dims.f_blocks() && items[k].td <= dims.t_blocks();
            let a = if fits { items[k].area() } else { 0 };
            optional_suffix[k] = optional_suffix[k + 1] + if items[k].mandatory { 0 } else { a };
            mandatory_suffix[k] = mandatory_suffix[k + 1] + if items[k].mandatory { items[k].area() } else { 0 };
        }
        Self {
            rows: dims.f_blocks(),
            cols: dims.t_blocks(),
            items,
            occupied: vec![false; dims.capacity()],
            free: dims.capacity(),
            positions: vec![None; n],
            area: 0,
            optional_suffix,
            mandatory_suffix,
            best: None,
        }
    }

    fn vacant(&self, i: usize, j: usize, f: usize, td: usize) -> bool {
        if i + f > self.rows || j + td > self.cols {
            return false;
        }
        (i..i + f).all(|r| {
            self.occupied[r * self.cols + j..r * self.cols + j + td]
                .iter()
                .all(|c| !c)
        })
    }

    fn mark(&mut self, i: usize, j: usize, f: usize, td: usize, value: bool) {
        for r in i..i + f {
            self.occupied[r * self.cols + j..r * self.cols + j + td].fill(value);
        }
        if value {
            self.free -= f * td;
        } else {
            self.free += f * td;
        }
    }

    fn run(&mut self, k: usize) {
        if k == self.items.len() {
            if self.best.as_ref().is_none_or(|(a, _)| self.area > *a) {
                self.best = Some((self.area, self.positions.clone()));
            }
            return;
        }
        if self.free < self.mandatory_suffix[k] {
            return;
        }
        if let Some((best, _)) = &self.best {
            let room = self.free - self.mandatory_suffix[k];
            if self.area + self.optional_suffix[k].min(room) <= *best {
                return;
            }
        }
        let item = self.items[k];
        let candidates: Vec<(usize, usize)> = match item.fixed {
            Some(pos) => vec![pos],
            None if item.f <= self.rows && item.td <= self.cols => (0..=self.rows - item.f)
                .flat_map(|i| (0..=self.cols - item.td).map(move |j| (i, j)))
                .collect(),
            None => Vec::new(),
        };
        for (i, j) in candidates {
            if !self.vacant(i, j, item.f, item.td) {
                continue;
            }
            self.mark(i, j, item.f, item.td, true);
            self.positions[k] = Some((i, j));
            if !item.mandatory {
                self.area += item.area();
            }
            self.run(k + 1);
            if !item.mandatory {
                self.area -= item.area();
            }
            self.positions[k] = None;
            self.mark(i, j, item.f, item.td, false);
        }
        if !item.mandatory {
            self.run(k + 1);
        }
    }
}

fn solve_stage(dims: SubstrateDims, items: &[Item]) -> Option<(usize, PositionVector)> {
    let mut search = Search::new(dims, items);
    search.run(0);
    search.best
}

/// Staged exact embedding. `new_by_priority[k]` holds priority `k + 1`.
pub fn embed_exact(
    dims: SubstrateDims,
    existing: &[EmbedRequest],
    new_by_priority: &[Vec<EmbedRequest>],
    mode: ExactMode,
    costs: &PriorityCosts,
) -> Result<ExactSolution, EmbedError> {
    let previous = require_existing(existing)?;
    for r in existing.iter().chain(new_by_priority.iter().flatten()) {
        if r.priority == 0 || r.priority as usize > costs.levels() {
            return Err(EmbedError::BadPriority {
                id: r.network_id,
                priority: r.priority,
                levels: costs.levels(),
            });
        }
    }
    if new_by_priority.iter().flatten().any(|r| r.kind != RequestKind::New) {
        return Err(EmbedError::InvalidState("running network passed as a new request"));
    }

    let mut fixed: Vec<Item> = previous
        .iter()
        .map(|p| Item {
            id: p.network_id,
            f: p.f,
            td: p.td,
            fixed: match mode {
                ExactMode::Static => Some((p.origin_i, p.origin_j)),
                ExactMode::Dynamic => None,
            },
            mandatory: true,
        })
        .collect();
    fixed.sort_by_key(|it| it.id);

    let no_levels: [Vec<EmbedRequest>; 1] = [Vec::new()];
    let levels = if new_by_priority.is_empty() {
        &no_levels[..]
    } else {
        new_by_priority
    };

    let mut level_areas = Vec::with_capacity(levels.len());
    let mut final_items = fixed.clone();
    let mut final_positions: PositionVector = Vec::new();
    for level in levels {
        let mut optional: Vec<Item> = level
            .iter()
            .map(|r| Item {
                id: r.network_id,
                f: r.f,
                td: r.td,
                fixed: None,
                mandatory: false,
            })
            .collect();
        optional.sort_by_key(|it| it.id);
        let mut items = fixed.clone();
        items.extend(optional.iter().copied());

        let (area, positions) = solve_stage(dims, &items).ok_or(EmbedError::Infeasible)?;
        level_areas.push(area);
        for (it, pos) in optional.iter().zip(&positions[fixed.len()..]) {
            if pos.is_some() {
                fixed.push(Item { mandatory: true, ..*it });
            }
        }
        final_items = items;
        final_positions = positions;
    }

    let placements: Vec<Placement> = final_items
        .iter()
        .zip(&final_positions)
        .filter_map(|(it, pos)| pos.map(|(i, j)| Placement::new(it.id, i, j, it.f, it.td)))
        .collect();
    let embedded: Vec<NetworkId> = new_by_priority
        .iter()
        .flatten()
        .map(|r| r.network_id)
        .filter(|id| placements.iter().any(|p| p.network_id == *id))
        .collect();
    let deferred_ids = new_by_priority
        .iter()
        .flatten()
        .map(|r| r.network_id)
        .filter(|id| !embedded.contains(id))
        .collect();
    let objective = existing
        .iter()
        .chain(new_by_priority.iter().flatten())
        .filter(|r| placements.iter().any(|p| p.network_id == r.network_id))
        .map(|r| costs.cost(r.priority) * r.area() as f64)
        .fold(0.0, |acc, v| acc + v);

    Ok(ExactSolution {
        result: StageResult {
            placements,
            embedded_ids: embedded,
            deferred_ids,
            reembed_failures: 0,
            combination_fallbacks: 0,
        }
        .normalize(),
        objective,
        level_areas,
    })
}
