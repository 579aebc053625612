//! Brute-force references shared by the property and acceptance suites.
//! Nothing here calls into the grid or embedder algorithms it checks.
#![allow(dead_code)]

use proptest::prelude::*;
use vne_core::grid::{NetworkId, OccupancyGrid, Placement, SubstrateDims, VacantRegion};

/// Every maximal vacant rectangle with height >= f and width >= td, found
/// by enumerating all rectangles of the grid.
pub fn brute_maximal_regions(grid: &OccupancyGrid, f: usize, td: usize) -> Vec<VacantRegion> {
    let rows = grid.dims().f_blocks();
    let cols = grid.dims().t_blocks();
    let vacant = |i: usize, j: usize, h: usize, w: usize| {
        i + h <= rows && j + w <= cols && (i..i + h).all(|r| (j..j + w).all(|c| !grid.is_occupied(r, c)))
    };
    let mut out = Vec::new();
    for i in 0..rows {
        for j in 0..cols {
            for h in 1..=rows - i {
                for w in 1..=cols - j {
                    if !vacant(i, j, h, w) {
                        continue;
                    }
                    let grows_up = i > 0 && vacant(i - 1, j, h + 1, w);
                    let grows_left = j > 0 && vacant(i, j - 1, h, w + 1);
                    let grows_down = vacant(i, j, h + 1, w);
                    let grows_right = vacant(i, j, h, w + 1);
                    if !(grows_up || grows_left || grows_down || grows_right) && h >= f && w >= td {
                        out.push(VacantRegion {
                            origin_i: i,
                            origin_j: j,
                            height: h,
                            width: w,
                        });
                    }
                }
            }
        }
    }
    out.sort_by_key(|r| (r.area(), r.origin_i, r.origin_j, r.height));
    out
}

/// Free/occupied borders: for each occupied cell, its free 4-neighbours.
pub fn brute_edi(grid: &OccupancyGrid) -> usize {
    let rows = grid.dims().f_blocks() as isize;
    let cols = grid.dims().t_blocks() as isize;
    let mut n = 0;
    for i in 0..rows {
        for j in 0..cols {
            if !grid.is_occupied(i as usize, j as usize) {
                continue;
            }
            for (di, dj) in [(-1, 0), (1, 0), (0, -1), (0, 1)] {
                let (a, b) = (i + di, j + dj);
                if a >= 0 && b >= 0 && a < rows && b < cols && !grid.is_occupied(a as usize, b as usize) {
                    n += 1;
                }
            }
        }
    }
    n
}

/// Whether the rectangles `shapes` can be packed into `dims` without
/// overlap, by exhaustive placement search.
pub fn brute_packable(dims: SubstrateDims, shapes: &[(usize, usize)]) -> bool {
    fn go(rows: usize, cols: usize, used: &mut Vec<bool>, shapes: &[(usize, usize)]) -> bool {
        let Some((&(f, td), rest)) = shapes.split_first() else {
            return true;
        };
        if f > rows || td > cols {
            return false;
        }
        for i in 0..=rows - f {
            for j in 0..=cols - td {
                let cells: Vec<usize> = (i..i + f)
                    .flat_map(|r| (j..j + td).map(move |c| r * cols + c))
                    .collect();
                if cells.iter().any(|&k| used[k]) {
                    continue;
                }
                cells.iter().for_each(|&k| used[k] = true);
                let ok = go(rows, cols, used, rest);
                cells.iter().for_each(|&k| used[k] = false);
                if ok {
                    return true;
                }
            }
        }
        false
    }
    let mut used = vec![false; dims.capacity()];
    go(dims.f_blocks(), dims.t_blocks(), &mut used, shapes)
}

/// Grid built from an occupancy bitmask, one 1x1 network per set bit.
pub fn grid_from_mask(dims: SubstrateDims, mask: u64) -> OccupancyGrid {
    let mut g = OccupancyGrid::new(dims);
    for k in 0..dims.capacity() {
        if mask >> k & 1 == 1 {
            let p = Placement::new(NetworkId(k as u64), k / dims.t_blocks(), k % dims.t_blocks(), 1, 1);
            g.place(&p).unwrap();
        }
    }
    g
}

/// A substrate of up to 6x6 with up to three non-overlapping rectangles.
#[derive(Clone, Debug)]
pub struct RandomGrid {
    pub grid: OccupancyGrid,
    pub placements: Vec<Placement>,
}

pub fn random_grid() -> impl Strategy<Value = RandomGrid> {
    (1usize..=6, 1usize..=6)
        .prop_flat_map(|(f, t)| {
            let rect = (0..f, 0..t, 1..=f, 1..=t);
            (Just((f, t)), prop::collection::vec(rect, 0..=3))
        })
        .prop_map(|((f, t), rects)| {
            let dims = SubstrateDims::new(f, t).unwrap();
            let mut grid = OccupancyGrid::new(dims);
            let mut placements = Vec::new();
            for (k, (i, j, h, w)) in rects.into_iter().enumerate() {
                let p = Placement::new(NetworkId(k as u64), i, j, h.min(f - i), w.min(t - j));
                if grid.place(&p).is_ok() {
                    placements.push(p);
                }
            }
            RandomGrid { grid, placements }
        })
}
