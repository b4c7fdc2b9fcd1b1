use std::collections::{BTreeMap, BTreeSet};

use crate::geo::{Grid, Rect, Tile};
use crate::store::{Dialect, Geometry, QueryStatement, SpatialStore};

/// Data-set id under which index tiles are stored.
pub const INDEX_DID: &str = "__index";

/// A site's advertised set of active tiles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tessellation {
    pub dbsid: String,
    pub version: u64,
    /// Sorted, pairwise non-overlapping.
    pub tiles: Vec<Tile>,
}

/// Merged global index: the latest known tessellation of every site,
/// stored as square objects tagged with their owner's dbsid.
#[derive(Debug, Clone)]
pub struct GlobalIndexStore {
    store: SpatialStore,
    entries: BTreeMap<String, Tessellation>,
}

impl GlobalIndexStore {
    pub fn new(grid: Grid) -> Self {
        Self {
            store: SpatialStore::with_index_level("global", grid, Dialect::A, 0).expect("level 0 is valid"),
            entries: BTreeMap::new(),
        }
    }

    pub fn version(&self, dbsid: &str) -> Option<u64> {
        self.entries.get(dbsid).map(|t| t.version)
    }

    pub fn tessellation(&self, dbsid: &str) -> Option<&Tessellation> {
        self.entries.get(dbsid)
    }

    pub fn tessellations(&self) -> impl Iterator<Item = &Tessellation> {
        self.entries.values()
    }

    pub fn tile_count(&self) -> usize {
        self.entries.values().map(|t| t.tiles.len()).sum()
    }

    fn tile_id(dbsid: &str, t: &Tile) -> String {
        format!("{dbsid}@{t}")
    }

    /// Replace the stored tessellation of `tess.dbsid` iff `tess` is
    /// strictly newer. Returns whether it was applied.
    pub fn merge(&mut self, tess: Tessellation) -> bool {
        if self.version(&tess.dbsid).is_some_and(|v| v >= tess.version) {
            return false;
        }
        if let Some(old) = self.entries.remove(&tess.dbsid) {
            for t in &old.tiles {
                self.store
                    .delete(INDEX_DID, &Self::tile_id(&old.dbsid, t))
                    .expect("stored tiles are present");
            }
        }
        for t in &tess.tiles {
            let props = [("dbsid".to_string(), tess.dbsid.clone())].into();
            self.store
                .insert(INDEX_DID, &Self::tile_id(&tess.dbsid, t), Geometry::Tile(*t), props)
                .expect("tessellation tiles are distinct");
        }
        self.entries.insert(tess.dbsid.clone(), tess);
        true
    }

    /// Sites owning at least one tile whose extent intersects `area`.
    pub fn lookup(&self, area: &Rect) -> BTreeSet<String> {
        self.store
            .query_objects(&QueryStatement::new(INDEX_DID, *area))
            .into_iter()
            .filter_map(|o| o.properties.get("dbsid").cloned())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tess(dbsid: &str, version: u64, tiles: &[Tile]) -> Tessellation {
        Tessellation {
            dbsid: dbsid.into(),
            version,
            tiles: tiles.to_vec(),
        }
    }

    #[test]
    fn merge_and_lookup() {
        let mut g = GlobalIndexStore::new(Grid::default());
        let r = Rect::from_bounds(12.0, 41.0, 12.5, 41.5).unwrap();
        assert!(g.lookup(&r).is_empty());
        let a = Tile { level: 1, ix: 1921, iy: 1312 };
        assert!(g.merge(tess("dbs#1", 1, &[a])));
        assert_eq!(g.lookup(&r), ["dbs#1".to_string()].into());
        assert!(g.lookup(&Rect::from_bounds(13.0, 41.0, 13.5, 41.5).unwrap()).is_empty());
        // same or older version ignored
        assert!(!g.merge(tess("dbs#1", 1, &[])));
        assert!(!g.merge(tess("dbs#1", 0, &[])));
        assert_eq!(g.tile_count(), 1);
        let b = Tile { level: 2, ix: 19_300, iy: 13_100 };
        assert!(g.merge(tess("dbs#1", 2, &[b])));
        assert!(g.lookup(&r).is_empty());
        assert!(g.merge(tess("dbs#2", 5, &[a, b])));
        assert_eq!(g.lookup(&r), ["dbs#2".to_string()].into());
        let wide = Rect::from_bounds(11.0, 40.0, 13.0, 42.0).unwrap();
        assert_eq!(g.lookup(&wide).len(), 2);
        assert_eq!(g.tile_count(), 3);
    }
}
