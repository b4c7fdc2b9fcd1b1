//! Per-site index processor: recomputes the local tessellation, advertises
//! its version, serves it in chunks, and fetches newer remote versions.
//!
//! Pure state machine: every handler returns the packets to transmit and
//! takes nonces from the caller, so it runs unchanged inside the simulator.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::geo::{Grid, Tile};
use crate::icn::{sign_data, sign_interest, verify_data, verify_interest, Data, Interest, PacketSigner, PacketVerifier};
use crate::icn::{Time, DEFAULT_MAX_PAYLOAD};
use crate::store::SpatialStore;

use super::codec::{decode_chunk, encode_chunks};
use super::global::{GlobalIndexStore, Tessellation};
use super::names::{gdata_name, parse_gdata, parse_vinterest, vinterest_name};
use super::tessellation::{compute_smin, tessellate};

#[derive(Debug, Clone)]
pub struct SyncConfig {
    /// Maximum active tiles advertised; `None` advertises the finest set.
    pub k: Option<usize>,
    pub max_payload: usize,
    /// Freshness of gData; names are versioned, so caching is safe.
    pub gdata_freshness_ms: u64,
    /// A fetch still incomplete after this long may be restarted.
    pub fetch_timeout: Time,
}

impl Default for SyncConfig {
    fn default() -> Self {
        Self {
            k: Some(100),
            max_payload: DEFAULT_MAX_PAYLOAD,
            gdata_freshness_ms: 10_000,
            fetch_timeout: 4_000_000,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SyncStats {
    pub recomputations: u64,
    pub versions_published: u64,
    pub vinterests_sent: u64,
    pub ginterests_sent: u64,
    pub gdata_served: u64,
    pub merges: u64,
    pub bad_signatures: u64,
    pub stale_ignored: u64,
    pub malformed: u64,
}

#[derive(Debug, Clone)]
struct Fetch {
    version: u64,
    started: Time,
    total: Option<u32>,
    chunks: BTreeMap<u32, Vec<Tile>>,
}

pub struct IndexSync {
    dbsid: String,
    grid: Grid,
    config: SyncConfig,
    local: Tessellation,
    chunks: Vec<Arc<Data>>,
    last_revision: Option<u64>,
    global: GlobalIndexStore,
    fetches: BTreeMap<String, Fetch>,
    stats: SyncStats,
}

impl IndexSync {
    pub fn new(dbsid: impl Into<String>, grid: Grid, config: SyncConfig) -> Self {
        let dbsid = dbsid.into();
        Self {
            local: Tessellation {
                dbsid: dbsid.clone(),
                version: 0,
                tiles: Vec::new(),
            },
            dbsid,
            grid,
            config,
            chunks: Vec::new(),
            last_revision: None,
            global: GlobalIndexStore::new(grid),
            fetches: BTreeMap::new(),
            stats: SyncStats::default(),
        }
    }

    pub fn global(&self) -> &GlobalIndexStore {
        &self.global
    }

    pub fn local(&self) -> &Tessellation {
        &self.local
    }

    pub fn stats(&self) -> &SyncStats {
        &self.stats
    }

    /// Published gData packets of the current version.
    pub fn chunks(&self) -> &[Arc<Data>] {
        &self.chunks
    }

    /// Wire bytes of the current announcement.
    pub fn announcement_bytes(&self) -> usize {
        self.chunks.iter().map(|d| d.wire_len()).sum()
    }

    /// Recompute the local tessellation if the store changed since the last
    /// call. The version is bumped only when the tile set changes. Returns
    /// whether a new version was published.
    pub fn refresh(&mut self, store: &SpatialStore, signer: &dyn PacketSigner) -> bool {
        if self.last_revision == Some(store.revision()) {
            return false;
        }
        self.last_revision = Some(store.revision());
        self.stats.recomputations += 1;
        let smin = compute_smin(store, None);
        let tiles = match self.config.k {
            Some(k) => tessellate(self.grid, &smin, k),
            None => smin.into_iter().collect(),
        };
        if self.local.version > 0 && tiles == self.local.tiles {
            return false;
        }
        self.publish(tiles, signer);
        true
    }

    fn publish(&mut self, tiles: Vec<Tile>, signer: &dyn PacketSigner) {
        self.local.version += 1;
        self.local.tiles = tiles;
        let version = self.local.version;
        self.chunks = encode_chunks(&self.local.tiles, self.config.max_payload)
            .into_iter()
            .enumerate()
            .map(|(i, payload)| {
                let name = gdata_name(&self.dbsid, version, i as u32);
                Arc::new(sign_data(name, payload, self.config.gdata_freshness_ms, signer))
            })
            .collect();
        self.global.merge(self.local.clone());
        self.stats.versions_published += 1;
    }

    /// The periodic vInterest, once a version exists.
    pub fn advertisement(&mut self, nonce: u64, signer: &dyn PacketSigner) -> Option<Interest> {
        if self.local.version == 0 {
            return None;
        }
        self.stats.vinterests_sent += 1;
        Some(sign_interest(vinterest_name(&self.dbsid, self.local.version), nonce, signer))
    }

    /// React to a vInterest: request chunk 0 of an unseen newer version.
    pub fn on_vinterest(
        &mut self,
        now: Time,
        interest: &Interest,
        verifier: &dyn PacketVerifier,
        nonce: &mut dyn FnMut() -> u64,
        signer: &dyn PacketSigner,
    ) -> Vec<Interest> {
        let Some((dbsid, version)) = parse_vinterest(&interest.name) else {
            self.stats.malformed += 1;
            return Vec::new();
        };
        if dbsid == self.dbsid {
            return Vec::new();
        }
        if !verify_interest(interest, verifier) {
            self.stats.bad_signatures += 1;
            return Vec::new();
        }
        if self.global.version(&dbsid).is_some_and(|v| v >= version) {
            return Vec::new();
        }
        if let Some(f) = self.fetches.get(&dbsid) {
            let live = now < f.started + self.config.fetch_timeout;
            if f.version > version || (f.version == version && live) {
                return Vec::new();
            }
        }
        self.fetches.insert(
            dbsid.clone(),
            Fetch {
                version,
                started: now,
                total: None,
                chunks: BTreeMap::new(),
            },
        );
        self.stats.ginterests_sent += 1;
        vec![sign_interest(gdata_name(&dbsid, version, 0), nonce(), signer)]
    }

    /// Answer a gInterest for one of our own chunks.
    pub fn serve_ginterest(&mut self, interest: &Interest, verifier: &dyn PacketVerifier) -> Option<Arc<Data>> {
        let (dbsid, version, seq) = parse_gdata(&interest.name)?;
        if dbsid != self.dbsid || version != self.local.version {
            return None;
        }
        if !verify_interest(interest, verifier) {
            self.stats.bad_signatures += 1;
            return None;
        }
        let d = self.chunks.get(seq as usize)?.clone();
        self.stats.gdata_served += 1;
        Some(d)
    }

    /// Absorb one gData chunk; returns follow-up gInterests. The remote
    /// tessellation is merged only once every chunk has arrived.
    pub fn on_gdata(
        &mut self,
        data: &Data,
        verifier: &dyn PacketVerifier,
        nonce: &mut dyn FnMut() -> u64,
        signer: &dyn PacketSigner,
    ) -> Vec<Interest> {
        let Some((dbsid, version, seq)) = parse_gdata(&data.name) else {
            self.stats.malformed += 1;
            return Vec::new();
        };
        if !verify_data(data, verifier) {
            self.stats.bad_signatures += 1;
            return Vec::new();
        }
        let Some(fetch) = self.fetches.get_mut(&dbsid).filter(|f| f.version == version) else {
            self.stats.stale_ignored += 1;
            return Vec::new();
        };
        let (total, tiles) = match decode_chunk(&data.payload) {
            Ok(x) => x,
            Err(_) => {
                self.stats.malformed += 1;
                return Vec::new();
            }
        };
        let mut out = Vec::new();
        if fetch.total.is_none() {
            fetch.total = Some(total);
            for s in 1..total {
                out.push(sign_interest(gdata_name(&dbsid, version, s), nonce(), signer));
            }
            self.stats.ginterests_sent += out.len() as u64;
        }
        if fetch.total != Some(total) || seq >= total {
            self.stats.malformed += 1;
            return out;
        }
        fetch.chunks.insert(seq, tiles);
        if fetch.chunks.len() == total as usize {
            let fetch = self.fetches.remove(&dbsid).expect("present");
            let tiles = fetch.chunks.into_values().flatten().collect();
            if self.global.merge(Tessellation { dbsid, version, tiles }) {
                self.stats.merges += 1;
            } else {
                self.stats.stale_ignored += 1;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::{Point, Rect};
    use crate::icn::{HmacSigner, KeyRegistry, TrustAnchor};
    use crate::name::Name;
    use crate::store::{Dialect, Geometry};

    struct Env {
        reg: KeyRegistry,
        s1: HmacSigner,
        s2: HmacSigner,
    }

    fn env() -> Env {
        let anchor = TrustAnchor::new([1; 32]);
        let mut reg = KeyRegistry::new(anchor.clone());
        let l1 = Name::parse("dbs#1/KEY").unwrap();
        let l2 = Name::parse("dbs#2/KEY").unwrap();
        reg.register(&anchor.issue(l1.clone(), [2; 32])).unwrap();
        reg.register(&anchor.issue(l2.clone(), [3; 32])).unwrap();
        Env {
            reg,
            s1: HmacSigner::new(l1, [2; 32]),
            s2: HmacSigner::new(l2, [3; 32]),
        }
    }

    fn store_with(points: &[(f64, f64)]) -> SpatialStore {
        let mut s = SpatialStore::new("dbs#1", Grid::default(), Dialect::A);
        for (i, (x, y)) in points.iter().enumerate() {
            s.insert("POI", &i.to_string(), Geometry::Point(Point::new(*x, *y).unwrap()), Default::default())
                .unwrap();
        }
        s
    }

    /// Drive a full exchange from site 1 to site 2 without a network.
    fn transfer(e: &Env, a: &mut IndexSync, b: &mut IndexSync) -> usize {
        let mut n = 0u64;
        let mut nonce = move || {
            n += 1;
            n
        };
        let v = a.advertisement(1, &e.s1).unwrap();
        let mut pending = b.on_vinterest(0, &v, &e.reg, &mut nonce, &e.s2);
        let mut sent = 0;
        while let Some(gi) = pending.pop() {
            sent += 1;
            let d = a.serve_ginterest(&gi, &e.reg).unwrap();
            pending.extend(b.on_gdata(&d, &e.reg, &mut nonce, &e.s2));
        }
        sent
    }

    #[test]
    fn version_bumps_only_on_tile_change() {
        let e = env();
        let mut a = IndexSync::new("dbs#1", Grid::default(), SyncConfig::default());
        let mut store = store_with(&[(12.001, 41.001)]);
        assert!(a.advertisement(1, &e.s1).is_none());
        assert!(a.refresh(&store, &e.s1));
        assert_eq!(a.local().version, 1);
        assert!(!a.refresh(&store, &e.s1));
        // same cell, new object: tiles unchanged
        store
            .insert("POI", "x", Geometry::Point(Point::new(12.002, 41.002).unwrap()), Default::default())
            .unwrap();
        assert!(!a.refresh(&store, &e.s1));
        store
            .insert("POI", "y", Geometry::Point(Point::new(14.005, 41.005).unwrap()), Default::default())
            .unwrap();
        assert!(a.refresh(&store, &e.s1));
        assert_eq!(a.local().version, 2);
        assert_eq!(a.local().tiles.len(), 2);
    }

    #[test]
    fn exchange_merges_and_duplicates_are_ignored() {
        let e = env();
        let mut a = IndexSync::new("dbs#1", Grid::default(), SyncConfig { k: None, ..Default::default() });
        let pts: Vec<(f64, f64)> = (0..1000).map(|i| (10.0005 + i as f64 * 0.013, 45.0005)).collect();
        a.refresh(&store_with(&pts), &e.s1);
        assert_eq!(a.chunks().len(), 3);
        let mut b = IndexSync::new("dbs#2", Grid::default(), SyncConfig::default());
        assert_eq!(transfer(&e, &mut a, &mut b), 3);
        assert_eq!(b.global().tessellation("dbs#1"), Some(a.local()));
        let area = Rect::from_bounds(10.0, 44.9, 10.001, 45.1).unwrap();
        assert_eq!(b.global().lookup(&area), ["dbs#1".to_string()].into());
        // same version again: no gInterest
        let v = a.advertisement(2, &e.s1).unwrap();
        assert!(b.on_vinterest(10, &v, &e.reg, &mut || 9, &e.s2).is_empty());
    }

    #[test]
    fn partial_fetch_not_visible_and_bad_signature_dropped() {
        let e = env();
        let mut a = IndexSync::new("dbs#1", Grid::default(), SyncConfig { k: None, ..Default::default() });
        let pts: Vec<(f64, f64)> = (0..600).map(|i| (10.0005 + i as f64 * 0.013, 45.0005)).collect();
        a.refresh(&store_with(&pts), &e.s1);
        let mut b = IndexSync::new("dbs#2", Grid::default(), SyncConfig::default());
        let v = a.advertisement(1, &e.s1).unwrap();
        let gi = b.on_vinterest(0, &v, &e.reg, &mut || 5, &e.s2);
        assert_eq!(gi.len(), 1);
        // in-flight fetch suppresses a repeated request
        assert!(b.on_vinterest(1, &v, &e.reg, &mut || 6, &e.s2).is_empty());
        let d0 = a.serve_ginterest(&gi[0], &e.reg).unwrap();
        let mut tampered = (*d0).clone();
        tampered.payload[5] ^= 1;
        assert!(b.on_gdata(&tampered, &e.reg, &mut || 7, &e.s2).is_empty());
        assert_eq!(b.stats().bad_signatures, 1);
        let rest = b.on_gdata(&d0, &e.reg, &mut || 8, &e.s2);
        assert_eq!(rest.len(), 1);
        assert!(b.global().tessellation("dbs#1").is_none());
        let d1 = a.serve_ginterest(&rest[0], &e.reg).unwrap();
        b.on_gdata(&d1, &e.reg, &mut || 9, &e.s2);
        assert_eq!(b.global().version("dbs#1"), Some(1));
        // forged vInterest is ignored
        let forged = Interest::unsigned(vinterest_name("dbs#1", 9), 1);
        assert!(b.on_vinterest(2, &forged, &e.reg, &mut || 10, &e.s2).is_empty());
        assert_eq!(b.stats().bad_signatures, 2);
    }
}
