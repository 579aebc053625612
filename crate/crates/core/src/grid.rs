//! Occupancy grid over the frequency × time resource substrate.
//!
//! Rows are frequency blocks (`i`, `0..F`) and columns are time-domain
//! blocks (`j`, `0..T`). Every occupied cell has exactly one owner and the
//! cells of one owner always form a single axis-aligned rectangle.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

/// Identifier of a virtual network (and of the request that created it).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NetworkId(pub u64);

impl fmt::Display for NetworkId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Substrate size: `f_blocks` frequency blocks by `t_blocks` time blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SubstrateDims {
    f_blocks: usize,
    t_blocks: usize,
}

impl SubstrateDims {
    pub fn new(f_blocks: usize, t_blocks: usize) -> Result<Self, GridError> {
        if f_blocks == 0 || t_blocks == 0 {
            return Err(GridError::EmptySubstrate);
        }
        Ok(Self { f_blocks, t_blocks })
    }

    #[inline]
    pub fn f_blocks(&self) -> usize {
        self.f_blocks
    }

    #[inline]
    pub fn t_blocks(&self) -> usize {
        self.t_blocks
    }

    /// Total number of resource blocks.
    #[inline]
    pub fn capacity(&self) -> usize {
        self.f_blocks * self.t_blocks
    }

    /// Whether an `f` × `td` rectangle can fit at all.
    #[inline]
    pub fn fits(&self, f: usize, td: usize) -> bool {
        f >= 1 && td >= 1 && f <= self.f_blocks && td <= self.t_blocks
    }
}

/// A rectangle of resource blocks assigned to one network.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Placement {
    pub network_id: NetworkId,
    pub origin_i: usize,
    pub origin_j: usize,
    pub f: usize,
    pub td: usize,
}

impl Placement {
    pub fn new(network_id: NetworkId, origin_i: usize, origin_j: usize, f: usize, td: usize) -> Self {
        Self {
            network_id,
            origin_i,
            origin_j,
            f,
            td,
        }
    }

    #[inline]
    pub fn area(&self) -> usize {
        self.f * self.td
    }

    pub fn within(&self, dims: SubstrateDims) -> bool {
        self.f >= 1
            && self.td >= 1
            && self.origin_i + self.f <= dims.f_blocks
            && self.origin_j + self.td <= dims.t_blocks
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        i >= self.origin_i && i < self.origin_i + self.f && j >= self.origin_j && j < self.origin_j + self.td
    }

    /// All covered `(i, j)` cells, row-major.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (self.origin_i..self.origin_i + self.f)
            .flat_map(move |i| (self.origin_j..self.origin_j + self.td).map(move |j| (i, j)))
    }
}

/// A maximal vacant rectangle of a grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct VacantRegion {
    pub origin_i: usize,
    pub origin_j: usize,
    /// Frequency span.
    pub height: usize,
    /// Time span.
    pub width: usize,
}

impl VacantRegion {
    #[inline]
    pub fn area(&self) -> usize {
        self.height * self.width
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum GridError {
    #[error("substrate dimensions must be at least 1x1")]
    EmptySubstrate,
    #[error("placement of network {id} at ({i},{j}) size {f}x{td} exceeds the substrate")]
    OutOfBounds {
        id: NetworkId,
        i: usize,
        j: usize,
        f: usize,
        td: usize,
    },
    #[error("cell ({i},{j}) is already occupied by network {owner}")]
    Overlap { i: usize, j: usize, owner: NetworkId },
    #[error("network {0} is already placed on this grid")]
    DuplicateNetwork(NetworkId),
    #[error("network {0} owns no cell")]
    UnknownNetwork(NetworkId),
    #[error("region {height}x{width} cannot contain a {f}x{td} rectangle")]
    RegionTooSmall {
        height: usize,
        width: usize,
        f: usize,
        td: usize,
    },
}

/// F×T occupancy with per-cell ownership.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OccupancyGrid {
    dims: SubstrateDims,
    owner: Vec<Option<NetworkId>>,
}

impl fmt::Debug for OccupancyGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "OccupancyGrid {}x{}", self.dims.f_blocks, self.dims.t_blocks)?;
        for i in 0..self.dims.f_blocks {
            for j in 0..self.dims.t_blocks {
                let c = if self.is_occupied(i, j) { '#' } else { '.' };
                write!(f, "{c}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl OccupancyGrid {
    pub fn new(dims: SubstrateDims) -> Self {
        Self {
            dims,
            owner: vec![None; dims.capacity()],
        }
    }

    /// Builds a grid from a set of placements, failing on the first conflict.
    pub fn from_placements<'a, I>(dims: SubstrateDims, placements: I) -> Result<Self, GridError>
    where
        I: IntoIterator<Item = &'a Placement>,
    {
        let mut grid = Self::new(dims);
        for p in placements {
            grid.place(p)?;
        }
        Ok(grid)
    }

    #[inline]
    pub fn dims(&self) -> SubstrateDims {
        self.dims
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * self.dims.t_blocks + j
    }

    #[inline]
    pub fn is_occupied(&self, i: usize, j: usize) -> bool {
        self.owner[self.idx(i, j)].is_some()
    }

    #[inline]
    pub fn owner(&self, i: usize, j: usize) -> Option<NetworkId> {
        self.owner[self.idx(i, j)]
    }

    pub fn occupied_count(&self) -> usize {
        self.owner.iter().filter(|o| o.is_some()).count()
    }

    /// Occupied fraction of the substrate, in `[0, 1]`.
    pub fn occupancy(&self) -> f64 {
        self.occupied_count() as f64 / self.dims.capacity() as f64
    }

    pub fn contains_network(&self, id: NetworkId) -> bool {
        self.owner.contains(&Some(id))
    }

    /// Marks the cells of `p` as owned by `p.network_id`. The grid is left
    /// untouched on error.
    pub fn place(&mut self, p: &Placement) -> Result<(), GridError> {
        if !p.within(self.dims) {
            return Err(GridError::OutOfBounds {
                id: p.network_id,
                i: p.origin_i,
                j: p.origin_j,
                f: p.f,
                td: p.td,
            });
        }
        for (i, j) in p.cells() {
            if let Some(owner) = self.owner(i, j) {
                return Err(GridError::Overlap { i, j, owner });
            }
        }
        if self.contains_network(p.network_id) {
            return Err(GridError::DuplicateNetwork(p.network_id));
        }
        for (i, j) in p.cells() {
            let k = self.idx(i, j);
            self.owner[k] = Some(p.network_id);
        }
        Ok(())
    }

    /// Releases every cell owned by `id`.
    pub fn remove(&mut self, id: NetworkId) -> Result<(), GridError> {
        let mut found = false;
        for o in self.owner.iter_mut().filter(|o| **o == Some(id)) {
            *o = None;
            found = true;
        }
        if found {
            Ok(())
        } else {
            Err(GridError::UnknownNetwork(id))
        }
    }

    /// Value-style variant of [`place`](Self::place).
    pub fn with_placement(&self, p: &Placement) -> Result<Self, GridError> {
        let mut g = self.clone();
        g.place(p)?;
        Ok(g)
    }

    /// Whether every cell of the `f` × `td` rectangle at `(i, j)` is vacant.
    pub fn is_vacant_rect(&self, i: usize, j: usize, f: usize, td: usize) -> bool {
        if i + f > self.dims.f_blocks || j + td > self.dims.t_blocks {
            return false;
        }
        (i..i + f).all(|r| (j..j + td).all(|c| !self.is_occupied(r, c)))
    }

    /// Mirror image across the row axis, column axis, or the transpose.
    pub fn transformed(&self, t: GridTransform) -> Self {
        let (f, tt) = (self.dims.f_blocks, self.dims.t_blocks);
        let dims = match t {
            GridTransform::Transpose => SubstrateDims {
                f_blocks: tt,
                t_blocks: f,
            },
            _ => self.dims,
        };
        let mut out = Self::new(dims);
        for i in 0..f {
            for j in 0..tt {
                let (ni, nj) = match t {
                    GridTransform::Transpose => (j, i),
                    GridTransform::MirrorFrequency => (f - 1 - i, j),
                    GridTransform::MirrorTime => (i, tt - 1 - j),
                };
                let k = out.idx(ni, nj);
                out.owner[k] = self.owner(i, j);
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridTransform {
    Transpose,
    MirrorFrequency,
    MirrorTime,
}

/// All maximal vacant rectangles at least `f` high and `td` wide, ordered by
/// ascending area, then origin, then height.
pub fn find_vacant_regions(grid: &OccupancyGrid, f: usize, td: usize) -> Vec<VacantRegion> {
    let rows = grid.dims.f_blocks;
    let cols = grid.dims.t_blocks;
    let mut out = Vec::new();
    if f == 0 || td == 0 || f > rows || td > cols {
        return out;
    }

    // prefix[i][j] = occupied cells of row i in columns 0..j
    let stride = cols + 1;
    let mut prefix = vec![0usize; rows * stride];
    for i in 0..rows {
        for j in 0..cols {
            prefix[i * stride + j + 1] = prefix[i * stride + j] + grid.is_occupied(i, j) as usize;
        }
    }
    let row_blocked = |i: usize, c1: usize, c2: usize| prefix[i * stride + c2 + 1] > prefix[i * stride + c1];

    let mut col_free = vec![true; cols];
    for top in 0..rows {
        col_free.iter_mut().for_each(|c| *c = true);
        for bottom in top..rows {
            let mut any = false;
            for (j, free) in col_free.iter_mut().enumerate() {
                *free = *free && !grid.is_occupied(bottom, j);
                any |= *free;
            }
            if !any {
                break;
            }
            let height = bottom - top + 1;
            if height < f {
                continue;
            }
            let mut j = 0;
            while j < cols {
                if !col_free[j] {
                    j += 1;
                    continue;
                }
                let start = j;
                while j < cols && col_free[j] {
                    j += 1;
                }
                let end = j - 1;
                let width = end - start + 1;
                if width < td {
                    continue;
                }
                let up_blocked = top == 0 || row_blocked(top - 1, start, end);
                let down_blocked = bottom + 1 == rows || row_blocked(bottom + 1, start, end);
                if up_blocked && down_blocked {
                    out.push(VacantRegion {
                        origin_i: top,
                        origin_j: start,
                        height,
                        width,
                    });
                }
            }
        }
    }
    out.sort_by_key(|r| (r.area(), r.origin_i, r.origin_j, r.height));
    out
}

/// Embedding Density Index: the number of 4-neighbour cell pairs where
/// exactly one cell is occupied. The substrate boundary counts for nothing.
pub fn edi(grid: &OccupancyGrid) -> usize {
    edi_by(grid.dims, |i, j| grid.is_occupied(i, j))
}

fn edi_by(dims: SubstrateDims, occ: impl Fn(usize, usize) -> bool) -> usize {
    let mut borders = 0;
    for i in 0..dims.f_blocks {
        for j in 0..dims.t_blocks {
            let here = occ(i, j);
            if i + 1 < dims.f_blocks && here != occ(i + 1, j) {
                borders += 1;
            }
            if j + 1 < dims.t_blocks && here != occ(i, j + 1) {
                borders += 1;
            }
        }
    }
    borders
}

/// EDI of `grid` as if `candidate` were also placed.
pub fn edi_with(grid: &OccupancyGrid, candidate: &Placement) -> usize {
    edi_by(grid.dims, |i, j| grid.is_occupied(i, j) || candidate.contains(i, j))
}

/// Picks the corner of `region` (top-left, top-right, bottom-left,
/// bottom-right) whose placement yields the lowest EDI. The first minimum in
/// that order wins.
pub fn best_corner(
    grid: &OccupancyGrid,
    region: &VacantRegion,
    network_id: NetworkId,
    f: usize,
    td: usize,
) -> Result<Placement, GridError> {
    if f == 0 || td == 0 || region.height < f || region.width < td {
        return Err(GridError::RegionTooSmall {
            height: region.height,
            width: region.width,
            f,
            td,
        });
    }
    debug_assert!(grid.is_vacant_rect(region.origin_i, region.origin_j, region.height, region.width));
    let top = region.origin_i;
    let bottom = region.origin_i + region.height - f;
    let left = region.origin_j;
    let right = region.origin_j + region.width - td;
    let corners = [(top, left), (top, right), (bottom, left), (bottom, right)];

    let mut best: Option<(usize, Placement)> = None;
    for (i, j) in corners {
        let candidate = Placement::new(network_id, i, j, f, td);
        let score = edi_with(grid, &candidate);
        if best.as_ref().is_none_or(|(s, _)| score < *s) {
            best = Some((score, candidate));
        }
    }
    Ok(best.map(|(_, p)| p).expect("four corners evaluated"))
}

/// Karnaugh-map placement: the smallest feasible maximal vacant region, at
/// its EDI-minimising corner. `None` when nothing fits.
pub fn km_place(grid: &OccupancyGrid, network_id: NetworkId, f: usize, td: usize) -> Option<Placement> {
    let regions = find_vacant_regions(grid, f, td);
    let region = regions.first()?;
    best_corner(grid, region, network_id, f, td).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(f: usize, t: usize) -> SubstrateDims {
        SubstrateDims::new(f, t).unwrap()
    }

    fn grid_with(d: SubstrateDims, ps: &[Placement]) -> OccupancyGrid {
        OccupancyGrid::from_placements(d, ps).unwrap()
    }

    const A: NetworkId = NetworkId(0);
    const B: NetworkId = NetworkId(1);
    const C: NetworkId = NetworkId(2);

    #[test]
    fn zero_dims_rejected() {
        assert_eq!(SubstrateDims::new(0, 3), Err(GridError::EmptySubstrate));
        assert_eq!(SubstrateDims::new(3, 0), Err(GridError::EmptySubstrate));
    }

    #[test]
    fn place_two_by_three_at_origin() {
        let mut g = OccupancyGrid::new(dims(5, 5));
        g.place(&Placement::new(A, 0, 0, 2, 3)).unwrap();
        assert_eq!(g.occupied_count(), 6);
        for i in 0..5 {
            for j in 0..5 {
                assert_eq!(g.is_occupied(i, j), i < 2 && j < 3, "cell {i},{j}");
            }
        }
    }

    #[test]
    fn place_single_cell() {
        let mut g = grid_with(dims(5, 5), &[Placement::new(A, 0, 0, 2, 3)]);
        let before = g.occupied_count();
        g.place(&Placement::new(B, 4, 4, 1, 1)).unwrap();
        assert_eq!(g.occupied_count(), before + 1);
    }

    #[test]
    fn overlapping_placement_rejected_without_side_effects() {
        let mut g = grid_with(dims(5, 5), &[Placement::new(A, 0, 0, 2, 3)]);
        let snapshot = g.clone();
        let err = g.place(&Placement::new(C, 1, 1, 3, 3)).unwrap_err();
        assert_eq!(err, GridError::Overlap { i: 1, j: 1, owner: A });
        assert_eq!(g, snapshot);
    }

    #[test]
    fn out_of_bounds_and_duplicate() {
        let mut g = OccupancyGrid::new(dims(5, 5));
        assert!(matches!(
            g.place(&Placement::new(A, 4, 0, 2, 1)),
            Err(GridError::OutOfBounds { .. })
        ));
        assert!(matches!(
            g.place(&Placement::new(A, 0, 0, 0, 1)),
            Err(GridError::OutOfBounds { .. })
        ));
        g.place(&Placement::new(A, 0, 0, 1, 1)).unwrap();
        assert_eq!(
            g.place(&Placement::new(A, 3, 3, 1, 1)),
            Err(GridError::DuplicateNetwork(A))
        );
    }

    #[test]
    fn remove_restores_empty_grid() {
        let d = dims(5, 5);
        let mut g = grid_with(d, &[Placement::new(A, 0, 0, 2, 3)]);
        g.remove(A).unwrap();
        assert_eq!(g, OccupancyGrid::new(d));
    }

    #[test]
    fn remove_expired_leaves_other_network() {
        let mut g = grid_with(
            dims(5, 5),
            &[Placement::new(A, 0, 0, 2, 3), Placement::new(B, 2, 0, 2, 3)],
        );
        g.remove(A).unwrap();
        assert_eq!(g.occupied_count(), 6);
        assert!(!g.contains_network(A));
        assert!(Placement::new(B, 2, 0, 2, 3)
            .cells()
            .all(|(i, j)| g.owner(i, j) == Some(B)));
    }

    #[test]
    fn remove_unknown_network() {
        let mut g = OccupancyGrid::new(dims(5, 5));
        assert_eq!(g.remove(NetworkId(9)), Err(GridError::UnknownNetwork(NetworkId(9))));
    }

    #[test]
    fn empty_grid_single_maximal_region() {
        let g = OccupancyGrid::new(dims(5, 5));
        assert_eq!(
            find_vacant_regions(&g, 3, 3),
            vec![VacantRegion {
                origin_i: 0,
                origin_j: 0,
                height: 5,
                width: 5
            }]
        );
    }

    #[test]
    fn regions_exclude_too_narrow_strip() {
        let g = grid_with(dims(5, 5), &[Placement::new(B, 0, 0, 2, 3)]);
        let regions = find_vacant_regions(&g, 3, 3);
        assert_eq!(
            regions,
            vec![VacantRegion {
                origin_i: 2,
                origin_j: 0,
                height: 3,
                width: 5
            }]
        );
        // with a 1x1 query the 5x2 strip on the right shows up too
        let all = find_vacant_regions(&g, 1, 1);
        assert_eq!(
            all,
            vec![
                VacantRegion {
                    origin_i: 0,
                    origin_j: 3,
                    height: 5,
                    width: 2
                },
                VacantRegion {
                    origin_i: 2,
                    origin_j: 0,
                    height: 3,
                    width: 5
                },
            ]
        );
    }

    #[test]
    fn full_grid_has_no_regions() {
        let g = grid_with(dims(4, 4), &[Placement::new(A, 0, 0, 4, 4)]);
        assert!(find_vacant_regions(&g, 1, 1).is_empty());
    }

    #[test]
    fn edi_examples() {
        let d = dims(5, 5);
        assert_eq!(edi(&OccupancyGrid::new(d)), 0);
        assert_eq!(edi(&grid_with(d, &[Placement::new(A, 0, 0, 5, 5)])), 0);
        assert_eq!(edi(&grid_with(d, &[Placement::new(A, 0, 0, 2, 3)])), 5);
    }

    #[test]
    fn best_corner_tie_prefers_top_left() {
        let g = OccupancyGrid::new(dims(5, 5));
        let region = VacantRegion {
            origin_i: 0,
            origin_j: 0,
            height: 5,
            width: 5,
        };
        let p = best_corner(&g, &region, A, 2, 3).unwrap();
        assert_eq!((p.origin_i, p.origin_j), (0, 0));
        // every corner scores the same on an empty grid
        for (i, j) in [(0, 2), (3, 0), (3, 2)] {
            assert_eq!(edi_with(&g, &Placement::new(A, i, j, 2, 3)), 5);
        }
    }

    #[test]
    fn best_corner_abuts_existing_block() {
        let g = grid_with(dims(5, 5), &[Placement::new(B, 0, 0, 2, 3)]);
        let region = VacantRegion {
            origin_i: 2,
            origin_j: 0,
            height: 3,
            width: 5,
        };
        let p = best_corner(&g, &region, C, 3, 3).unwrap();
        assert_eq!((p.origin_i, p.origin_j), (2, 0));
        assert_eq!(edi_with(&g, &p), 5);
        assert_eq!(edi_with(&g, &Placement::new(C, 2, 2, 3, 3)), 9);
    }

    #[test]
    fn best_corner_exact_fit_and_too_small() {
        let g = grid_with(dims(5, 5), &[Placement::new(B, 0, 0, 2, 3)]);
        let region = VacantRegion {
            origin_i: 0,
            origin_j: 3,
            height: 5,
            width: 2,
        };
        let p = best_corner(&g, &region, C, 5, 2).unwrap();
        assert_eq!((p.origin_i, p.origin_j), (0, 3));
        assert!(matches!(
            best_corner(&g, &region, C, 3, 3),
            Err(GridError::RegionTooSmall { .. })
        ));
    }

    #[test]
    fn km_place_fails_when_nothing_fits() {
        let g = grid_with(dims(5, 5), &[Placement::new(B, 2, 0, 2, 3)]);
        assert_eq!(km_place(&g, C, 3, 3), None);
        assert!(km_place(&g, C, 2, 2).is_some());
    }
}
