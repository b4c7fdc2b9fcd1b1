//! Shared test oracles.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use icn_fed::{Grid, Tile};
use rand::Rng;

/// Every valid tessellation of the tree built from `smin`, as
/// `(size, cost in finest cells)`. A valid tessellation picks, for every
/// root-to-smin path, exactly one tree node.
pub fn all_covers(grid: Grid, smin: &BTreeSet<Tile>) -> Vec<(usize, u64)> {
    let finest = grid.finest();
    let mut children: BTreeMap<Tile, BTreeSet<Tile>> = BTreeMap::new();
    let mut count: BTreeMap<Tile, u64> = BTreeMap::new();
    let mut roots = BTreeSet::new();
    for s in smin {
        roots.insert(s.ancestor_at(0));
        for level in 0..=finest {
            *count.entry(s.ancestor_at(level)).or_default() += 1;
            if level > 0 {
                children.entry(s.ancestor_at(level - 1)).or_default().insert(s.ancestor_at(level));
            }
        }
    }
    let cells = |t: &Tile| 100u64.pow(u32::from(finest - t.level));
    fn covers(
        t: &Tile,
        children: &BTreeMap<Tile, BTreeSet<Tile>>,
        count: &BTreeMap<Tile, u64>,
        cells: &dyn Fn(&Tile) -> u64,
    ) -> Vec<(usize, u64)> {
        let mut out = vec![(1, cells(t) - count[t])];
        if let Some(ch) = children.get(t) {
            let mut acc = vec![(0usize, 0u64)];
            for c in ch {
                let sub = covers(c, children, count, cells);
                acc = acc
                    .iter()
                    .flat_map(|(n, x)| sub.iter().map(move |(m, y)| (n + m, x + y)))
                    .collect();
            }
            out.extend(acc);
        }
        out
    }
    let mut acc = vec![(0usize, 0u64)];
    for r in &roots {
        let sub = covers(r, &children, &count, &cells);
        acc = acc
            .iter()
            .flat_map(|(n, x)| sub.iter().map(move |(m, y)| (n + m, x + y)))
            .collect();
    }
    acc
}

/// Minimum cost over covers of size ≤ k, if any exists.
pub fn optimum(covers: &[(usize, u64)], k: usize) -> Option<u64> {
    covers.iter().filter(|(n, _)| *n <= k).map(|(_, c)| *c).min()
}

/// Clustered random finest tiles (N = 3): a few level-0 tiles, a few level-1
/// tiles inside each, a few finest tiles inside those.
pub fn random_smin(rng: &mut impl Rng, max_tiles: usize) -> BTreeSet<Tile> {
    let l0: Vec<(u32, u32)> = (0..rng.gen_range(1..=3))
        .map(|_| (rng.gen_range(170..200), rng.gen_range(120..160)))
        .collect();
    let l1: Vec<(u32, u32)> = (0..rng.gen_range(1..=5))
        .map(|_| {
            let (x, y) = l0[rng.gen_range(0..l0.len())];
            (x * 10 + rng.gen_range(0..10), y * 10 + rng.gen_range(0..10))
        })
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let target = rng.gen_range(1..=max_tiles.min(l1.len() * 100));
    let mut out = BTreeSet::new();
    while out.len() < target {
        let (x, y) = l1[rng.gen_range(0..l1.len())];
        out.insert(Tile {
            level: 2,
            ix: x * 10 + rng.gen_range(0..10),
            iy: y * 10 + rng.gen_range(0..10),
        });
    }
    out
}

/// True if no tile is an ancestor of another.
pub fn is_antichain(tiles: &[Tile]) -> bool {
    tiles
        .iter()
        .all(|a| tiles.iter().all(|b| a == b || !a.is_ancestor_of(b)))
}

pub fn covers_all(tiles: &[Tile], smin: &BTreeSet<Tile>) -> bool {
    smin.iter().all(|s| tiles.iter().any(|t| t == s || t.is_ancestor_of(s)))
}
