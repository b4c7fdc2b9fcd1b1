use std::collections::{BTreeMap, BTreeSet};

use rustc_hash::{FxHashMap, FxHashSet};

use crate::geo::{Grid, Rect, Tile};
use crate::name::Name;

use super::object::{Geometry, SpatialObject};
use super::statement::{parse_dialect, translate, Dialect, QueryStatement};
use super::StoreError;

type Handle = u64;

/// In-memory spatial database of one site.
///
/// Objects are indexed on a uniform grid (by default the finest grid level);
/// an object is registered in every cell its closed extent touches, so a
/// range query only needs to visit the cells covering the queried area.
#[derive(Debug, Clone)]
pub struct SpatialStore {
    dbsid: String,
    grid: Grid,
    index_level: u8,
    dialect: Dialect,
    next_handle: Handle,
    objects: FxHashMap<Handle, SpatialObject>,
    keys: FxHashMap<(String, String), Handle>,
    by_oname: FxHashMap<Name, Handle>,
    /// Past incarnations per (did, id); survives deletes.
    incarnations: FxHashMap<(String, String), u32>,
    cells: FxHashMap<Tile, FxHashSet<Handle>>,
    revision: u64,
}

fn check_part(what: &str, s: &str) -> Result<(), StoreError> {
    if s.is_empty() || s.contains('/') {
        return Err(StoreError::InvalidKey(format!("{what} {s:?}")));
    }
    Ok(())
}

impl SpatialStore {
    pub fn new(dbsid: impl Into<String>, grid: Grid, dialect: Dialect) -> Self {
        let level = grid.finest();
        Self::with_index_level(dbsid, grid, dialect, level).expect("finest level is valid")
    }

    pub fn with_index_level(
        dbsid: impl Into<String>,
        grid: Grid,
        dialect: Dialect,
        index_level: u8,
    ) -> Result<Self, StoreError> {
        let dbsid = dbsid.into();
        check_part("dbsid", &dbsid)?;
        if index_level >= grid.levels() {
            return Err(StoreError::InvalidKey(format!("index level {index_level}")));
        }
        Ok(Self {
            dbsid,
            grid,
            index_level,
            dialect,
            next_handle: 0,
            objects: FxHashMap::default(),
            keys: FxHashMap::default(),
            by_oname: FxHashMap::default(),
            incarnations: FxHashMap::default(),
            cells: FxHashMap::default(),
            revision: 0,
        })
    }

    pub fn dbsid(&self) -> &str {
        &self.dbsid
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dialect(&self) -> Dialect {
        self.dialect
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    /// Bumped by every successful mutation.
    pub fn revision(&self) -> u64 {
        self.revision
    }

    fn oname_for(&self, did: &str, id: &str, incarnation: u32, version: u32) -> Name {
        let local = if incarnation == 0 {
            format!("{id}-v{version}")
        } else {
            format!("{id}~{incarnation}-v{version}")
        };
        Name::from_components([self.dbsid.as_str(), "o", did, &local]).expect("components validated")
    }

    fn index_add(&mut self, h: Handle, g: &Geometry) {
        for t in g.cells(&self.grid, self.index_level).iter() {
            self.cells.entry(t).or_default().insert(h);
        }
    }

    fn index_remove(&mut self, h: Handle, g: &Geometry) {
        for t in g.cells(&self.grid, self.index_level).iter() {
            if let Some(set) = self.cells.get_mut(&t) {
                set.remove(&h);
                if set.is_empty() {
                    self.cells.remove(&t);
                }
            }
        }
    }

    pub fn insert(
        &mut self,
        did: &str,
        id: &str,
        geometry: Geometry,
        properties: BTreeMap<String, String>,
    ) -> Result<Name, StoreError> {
        check_part("did", did)?;
        check_part("id", id)?;
        let key = (did.to_string(), id.to_string());
        if self.keys.contains_key(&key) {
            return Err(StoreError::AlreadyExists(format!("{did}/{id}")));
        }
        let incarnation = self.incarnations.get(&key).copied().unwrap_or(0);
        let oname = self.oname_for(did, id, incarnation, 1);
        let h = self.next_handle;
        self.next_handle += 1;
        self.index_add(h, &geometry);
        self.objects.insert(
            h,
            SpatialObject {
                oname: oname.clone(),
                did: did.to_string(),
                id: id.to_string(),
                geometry,
                properties,
                version: 1,
            },
        );
        self.keys.insert(key, h);
        self.by_oname.insert(oname.clone(), h);
        self.revision += 1;
        Ok(oname)
    }

    pub fn update(
        &mut self,
        did: &str,
        id: &str,
        geometry: Geometry,
        properties: BTreeMap<String, String>,
    ) -> Result<Name, StoreError> {
        let key = (did.to_string(), id.to_string());
        let h = *self.keys.get(&key).ok_or_else(|| StoreError::NotFound(format!("{did}/{id}")))?;
        let old = self.objects.remove(&h).expect("handle is live");
        self.index_remove(h, &old.geometry);
        self.by_oname.remove(&old.oname);
        let incarnation = self.incarnations.get(&key).copied().unwrap_or(0);
        let version = old.version + 1;
        let oname = self.oname_for(did, id, incarnation, version);
        self.index_add(h, &geometry);
        self.objects.insert(
            h,
            SpatialObject {
                oname: oname.clone(),
                did: old.did,
                id: old.id,
                geometry,
                properties,
                version,
            },
        );
        self.by_oname.insert(oname.clone(), h);
        self.revision += 1;
        Ok(oname)
    }

    pub fn delete(&mut self, did: &str, id: &str) -> Result<(), StoreError> {
        let key = (did.to_string(), id.to_string());
        let h = self.keys.remove(&key).ok_or_else(|| StoreError::NotFound(format!("{did}/{id}")))?;
        let old = self.objects.remove(&h).expect("handle is live");
        self.index_remove(h, &old.geometry);
        self.by_oname.remove(&old.oname);
        *self.incarnations.entry(key).or_insert(0) += 1;
        self.revision += 1;
        Ok(())
    }

    /// Current version only; superseded or unknown names are not found.
    pub fn get(&self, oname: &Name) -> Result<&SpatialObject, StoreError> {
        self.by_oname
            .get(oname)
            .map(|h| &self.objects[h])
            .ok_or_else(|| StoreError::NotFound(oname.to_string()))
    }

    /// Current object stored under `(did, id)`.
    pub fn get_by_key(&self, did: &str, id: &str) -> Option<&SpatialObject> {
        self.keys
            .get(&(did.to_string(), id.to_string()))
            .map(|h| &self.objects[h])
    }

    /// Matching objects, sorted by oName.
    pub fn query_objects(&self, stmt: &QueryStatement) -> Vec<&SpatialObject> {
        let cover = self
            .grid
            .tiles_covering(&stmt.area, self.index_level)
            .expect("index level is valid");
        let mut seen = FxHashSet::default();
        let mut out: Vec<&SpatialObject> = Vec::new();
        let mut visit = |set: &FxHashSet<Handle>| {
            for h in set {
                if seen.insert(*h) {
                    let o = &self.objects[h];
                    if o.matches(&stmt.did, &stmt.area, &stmt.filters) {
                        out.push(o);
                    }
                }
            }
        };
        if cover.len() <= self.cells.len() {
            for t in cover.iter() {
                if let Some(set) = self.cells.get(&t) {
                    visit(set);
                }
            }
        } else {
            for (t, set) in &self.cells {
                if cover.contains(t) {
                    visit(set);
                }
            }
        }
        out.sort_by(|a, b| a.oname.cmp(&b.oname));
        out
    }

    /// Names of the matching objects, sorted. Routed through this store's
    /// dialect adapter like any statement arriving from the federation.
    pub fn query_onames(&self, stmt: &QueryStatement) -> Vec<Name> {
        let native = translate(stmt, self.dialect);
        self.execute(&native).expect("adapter output parses in its own dialect")
    }

    /// Run a statement already expressed in this store's dialect.
    pub fn execute(&self, native: &str) -> Result<Vec<Name>, StoreError> {
        let stmt = parse_dialect(native, self.dialect)?;
        Ok(self.query_objects(&stmt).into_iter().map(|o| o.oname.clone()).collect())
    }

    /// Every stored object, sorted by oName.
    pub fn objects(&self) -> Vec<&SpatialObject> {
        let mut v: Vec<&SpatialObject> = self.objects.values().collect();
        v.sort_by(|a, b| a.oname.cmp(&b.oname));
        v
    }

    /// Finest-level cells touched by objects of the given data-sets (all
    /// data-sets when `dids` is `None`).
    pub fn active_cells(&self, dids: Option<&BTreeSet<String>>) -> BTreeSet<Tile> {
        let finest = self.grid.finest();
        let wanted = |o: &SpatialObject| dids.is_none_or(|d| d.contains(&o.did));
        if self.index_level == finest {
            self.cells
                .iter()
                .filter(|(_, hs)| hs.iter().any(|h| wanted(&self.objects[h])))
                .map(|(t, _)| *t)
                .collect()
        } else {
            self.objects
                .values()
                .filter(|o| wanted(o))
                .flat_map(|o| o.geometry.cells(&self.grid, finest).iter().collect::<Vec<_>>())
                .collect()
        }
    }

    /// Index cells holding at least one object, with their handles resolved
    /// to oNames. Test support for index consistency checks.
    pub fn index_snapshot(&self) -> BTreeMap<Tile, BTreeSet<Name>> {
        self.cells
            .iter()
            .map(|(t, hs)| (*t, hs.iter().map(|h| self.objects[h].oname.clone()).collect()))
            .collect()
    }

    pub fn index_level(&self) -> u8 {
        self.index_level
    }

    /// Rectangle covering all stored geometry, for universal queries.
    pub fn world() -> Rect {
        Rect::from_bounds(-180.0, -90.0, 179.999_999_999, 90.0).expect("static bounds")
    }
}
