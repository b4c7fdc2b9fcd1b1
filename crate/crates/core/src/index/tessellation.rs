//! Size-constrained adaptive tessellation.
//!
//! Starting from the finest active tiles (`smin`), the tree of their
//! ancestors is reduced top-down: at each step the coarsest level at which a
//! new tile is still *necessary* is found, and the cheapest tile of that level
//! has its subtree collapsed into it. Iteration stops once the tree has at
//! most `k` leaves.
//!
//! Costs are kept in finest-cell units (`u64`) so comparisons are exact; the
//! generic accessors convert to any area scalar.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{FromPrimitive, Num};

use crate::geo::{tile_area, Grid, Tile};
use crate::store::SpatialStore;

/// Finest-level tiles intersecting at least one object of the given
/// data-sets (every data-set when `dids` is `None`).
pub fn compute_smin(store: &SpatialStore, dids: Option<&BTreeSet<String>>) -> BTreeSet<Tile> {
    store.active_cells(dids)
}

#[derive(Debug, Clone)]
struct Node {
    children: Vec<Tile>,
    /// Number of `smin` tiles at or below this node.
    smin_count: u64,
    alive: bool,
    /// Collapsed into a leaf of the final tessellation.
    fixed: bool,
}

/// Tree of `smin` tiles plus all their ancestors up to level 0. The common
/// synthetic root is implicit: level-0 nodes are its children.
#[derive(Debug, Clone)]
pub struct TileTree {
    grid: Grid,
    nodes: BTreeMap<Tile, Node>,
    /// Surviving nodes per level.
    alive_at: Vec<usize>,
    /// Collapsed leaves per level.
    fixed_at: Vec<usize>,
    /// Collapse candidates per level, ordered by (cost, tile).
    candidates: Vec<BTreeSet<(u64, Tile)>>,
}

impl TileTree {
    /// Build from `smin`. Tiles not at the grid's finest level are ignored.
    pub fn from_smin(grid: Grid, smin: &BTreeSet<Tile>) -> Self {
        let levels = grid.levels() as usize;
        let finest = grid.finest();
        let mut nodes: BTreeMap<Tile, Node> = BTreeMap::new();
        for s in smin.iter().filter(|t| t.level == finest) {
            for level in 0..=finest {
                let a = s.ancestor_at(level);
                let node = nodes.entry(a).or_insert_with(|| Node {
                    children: Vec::new(),
                    smin_count: 0,
                    alive: true,
                    fixed: false,
                });
                node.smin_count += 1;
                if node.smin_count == 1 && level > 0 {
                    let parent = s.ancestor_at(level - 1);
                    nodes.get_mut(&parent).expect("parent inserted first").children.push(a);
                }
            }
        }
        let mut alive_at = vec![0; levels];
        let mut candidates = vec![BTreeSet::new(); levels];
        for (t, n) in &nodes {
            alive_at[t.level as usize] += 1;
            if t.level < finest {
                candidates[t.level as usize].insert((grid.finest_cells(t) - n.smin_count, *t));
            }
        }
        Self {
            grid,
            nodes,
            alive_at,
            fixed_at: vec![0; levels],
            candidates,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Current number of leaves.
    pub fn leaf_count(&self) -> usize {
        self.reduced_count(self.grid.finest())
    }

    /// Leaves if every surviving level-`level` node were collapsed, with
    /// already-collapsed leaves above `level` kept as they are.
    pub fn reduced_count(&self, level: u8) -> usize {
        let j = level as usize;
        self.fixed_at[..j].iter().sum::<usize>() + self.alive_at[j]
    }

    pub fn level0_count(&self) -> usize {
        self.alive_at[0]
    }

    pub fn leaves(&self) -> BTreeSet<Tile> {
        let finest = self.grid.finest();
        self.nodes
            .iter()
            .filter(|(t, n)| n.alive && (n.fixed || t.level == finest))
            .map(|(t, _)| *t)
            .collect()
    }

    /// Level `i` such that finishing with level-`(i+1)` tiles cannot meet
    /// `k` but finishing with level-`i` tiles can. `None` when the leaves
    /// already fit, or when not even level 0 fits.
    pub fn next_level_needed(&self, k: usize) -> Option<u8> {
        if self.leaf_count() <= k || self.reduced_count(0) > k {
            return None;
        }
        (0..self.grid.finest()).find(|&i| self.reduced_count(i + 1) > k && self.reduced_count(i) <= k)
    }

    /// Cheapest collapse candidate at `level`, ties by tile order.
    pub fn cheapest_at(&self, level: u8) -> Option<(u64, Tile)> {
        self.candidates.get(level as usize)?.first().copied()
    }

    /// Turn `t` into a leaf, pruning its whole subtree.
    pub fn collapse(&mut self, t: Tile) {
        let Some(node) = self.nodes.get_mut(&t) else {
            return;
        };
        if !node.alive || node.fixed || t.level == self.grid.finest() {
            return;
        }
        node.fixed = true;
        let cost = self.grid.finest_cells(&t) - node.smin_count;
        self.candidates[t.level as usize].remove(&(cost, t));
        self.fixed_at[t.level as usize] += 1;
        let mut stack = node.children.clone();
        while let Some(d) = stack.pop() {
            let n = self.nodes.get_mut(&d).expect("child exists");
            if !n.alive {
                continue;
            }
            n.alive = false;
            self.alive_at[d.level as usize] -= 1;
            if n.fixed {
                self.fixed_at[d.level as usize] -= 1;
            } else if d.level < self.grid.finest() {
                let c = self.grid.finest_cells(&d) - n.smin_count;
                self.candidates[d.level as usize].remove(&(c, d));
            }
            stack.extend(n.children.iter().copied());
        }
    }
}

/// Greedy constrained tessellation of `smin` into at most `k` tiles.
///
/// When even the level-0 ancestors outnumber `k`, those ancestors are
/// returned. Result is sorted.
pub fn tessellate(grid: Grid, smin: &BTreeSet<Tile>, k: usize) -> Vec<Tile> {
    let mut tree = TileTree::from_smin(grid, smin);
    if tree.level0_count() > k {
        return tree.nodes.keys().filter(|t| t.level == 0).copied().collect();
    }
    while let Some(level) = tree.next_level_needed(k) {
        let (_, t) = tree.cheapest_at(level).expect("a necessary level has a candidate");
        tree.collapse(t);
    }
    tree.leaves().into_iter().collect()
}

/// Tile and tessellation costs relative to `smin`.
#[derive(Debug, Clone)]
pub struct CostModel {
    grid: Grid,
    /// smin tiles at or below each tree node.
    counts: BTreeMap<Tile, u64>,
}

impl CostModel {
    pub fn new(grid: Grid, smin: &BTreeSet<Tile>) -> Self {
        let mut counts = BTreeMap::new();
        for s in smin.iter().filter(|t| t.level == grid.finest()) {
            for level in 0..=grid.finest() {
                *counts.entry(s.ancestor_at(level)).or_insert(0) += 1;
            }
        }
        Self { grid, counts }
    }

    /// Tile area minus the area of its `smin` descendants, in finest cells.
    pub fn tile_cost_cells(&self, t: &Tile) -> u64 {
        self.grid.finest_cells(t) - self.counts.get(t).copied().unwrap_or(0)
    }

    pub fn tessellation_cost_cells(&self, tiles: &[Tile]) -> u64 {
        tiles.iter().map(|t| self.tile_cost_cells(t)).sum()
    }

    /// Tile cost in degree².
    pub fn tile_cost<A: Num + Copy + FromPrimitive>(&self, t: &Tile) -> A {
        self.cells_to_area(self.tile_cost_cells(t))
    }

    /// Tessellation cost in degree².
    pub fn tessellation_cost<A: Num + Copy + FromPrimitive>(&self, tiles: &[Tile]) -> A {
        self.cells_to_area(self.tessellation_cost_cells(tiles))
    }

    fn cells_to_area<A: Num + Copy + FromPrimitive>(&self, cells: u64) -> A {
        let finest = Tile {
            level: self.grid.finest(),
            ix: 0,
            iy: 0,
        };
        A::from_u64(cells).expect("cell count representable") * tile_area::<A>(&finest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ExactArea;

    fn grid() -> Grid {
        Grid::default()
    }

    fn fine(ix: u32, iy: u32) -> Tile {
        Tile { level: 2, ix, iy }
    }

    #[test]
    fn empty_and_unconstrained() {
        assert!(tessellate(grid(), &BTreeSet::new(), 3).is_empty());
        let smin: BTreeSet<Tile> = [fine(18_000, 9_000), fine(18_001, 9_000), fine(18_200, 9_100)].into();
        let s = tessellate(grid(), &smin, 3);
        assert_eq!(s, smin.iter().copied().collect::<Vec<_>>());
        assert_eq!(CostModel::new(grid(), &smin).tessellation_cost_cells(&s), 0);
    }

    #[test]
    fn three_pois_two_tiles() {
        // two POIs in adjacent fine tiles under one level-1 parent, one elsewhere
        let a = fine(19_245, 13_180);
        let b = fine(19_246, 13_180);
        let c = fine(19_271, 13_163);
        let smin: BTreeSet<Tile> = [a, b, c].into();
        let s = tessellate(grid(), &smin, 2);
        assert_eq!(s.len(), 2);
        assert_eq!(s, vec![Tile { level: 1, ix: 1924, iy: 1318 }, c]);
        let cost: ExactArea = CostModel::new(grid(), &smin).tessellation_cost(&s);
        assert_eq!(cost, ExactArea::new(98, 10_000));
    }

    #[test]
    fn level0_exception() {
        let smin: BTreeSet<Tile> = [fine(100, 100), fine(300, 300), fine(500, 500)].into();
        let s = tessellate(grid(), &smin, 2);
        assert_eq!(s.len(), 3);
        assert!(s.iter().all(|t| t.level == 0));
    }

    #[test]
    fn necessity_examples() {
        // 150 finest leaves under one level-0 tile, spread over 2 level-1 tiles
        let smin: BTreeSet<Tile> = (0..150u32).map(|i| fine(18_000 + i % 20, 9_000 + i / 20)).collect();
        let tree = TileTree::from_smin(grid(), &smin);
        assert_eq!(tree.leaf_count(), 150);
        assert_eq!(tree.reduced_count(0), 1);
        assert_eq!(tree.next_level_needed(1), Some(0));
        assert!(tree.reduced_count(1) <= 5);
        assert_eq!(tree.next_level_needed(5), Some(1));
        assert_eq!(tree.next_level_needed(150), None);
    }

    #[test]
    fn collapse_prunes_subtree() {
        let smin: BTreeSet<Tile> = (0..30u32).map(|i| fine(18_000 + i, 9_000)).collect();
        let mut tree = TileTree::from_smin(grid(), &smin);
        tree.collapse(Tile { level: 1, ix: 1800, iy: 900 });
        assert_eq!(tree.leaf_count(), 21);
        tree.collapse(Tile { level: 0, ix: 180, iy: 90 });
        assert_eq!(tree.leaves(), [Tile { level: 0, ix: 180, iy: 90 }].into());
        assert_eq!(tree.reduced_count(1), 1);
    }

    #[test]
    fn tile_costs() {
        let smin: BTreeSet<Tile> = [fine(18_000, 9_000), fine(18_001, 9_000)].into();
        let m = CostModel::new(grid(), &smin);
        assert_eq!(m.tile_cost_cells(&Tile { level: 1, ix: 1800, iy: 900 }), 98);
        assert_eq!(m.tile_cost_cells(&Tile { level: 0, ix: 180, iy: 90 }), 9_998);
        assert_eq!(m.tile_cost_cells(&fine(18_000, 9_000)), 0);
        let f: f64 = m.tile_cost(&Tile { level: 1, ix: 1800, iy: 900 });
        assert!((f - 0.0098).abs() < 1e-12);
    }
}
