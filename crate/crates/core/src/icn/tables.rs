//! Forwarding information base, pending interest table and content store.

use std::collections::{BTreeSet, VecDeque};
use std::num::NonZeroUsize;
use std::sync::Arc;

use lru::LruCache;
use rustc_hash::{FxHashMap, FxHashSet};

use crate::name::Name;

use super::packet::Data;
use super::{FaceId, Time};

/// One FIB route: upstream faces ordered by routing cost (cheapest first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibEntry {
    pub prefix: Name,
    pub faces: Vec<(FaceId, u64)>,
    pub multicast: bool,
}

impl FibEntry {
    /// Faces an Interest arriving on `face_in` is forwarded to.
    pub fn upstreams(&self, face_in: FaceId) -> Vec<FaceId> {
        let candidates = self.faces.iter().map(|(f, _)| *f).filter(|f| *f != face_in);
        if self.multicast {
            candidates.collect()
        } else {
            candidates.take(1).collect()
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Fib {
    entries: FxHashMap<Vec<String>, FibEntry>,
}

impl Fib {
    /// Add `face` to the route for `prefix`, creating it if needed. Faces
    /// already present keep their position; the list stays sorted by
    /// `(cost, face)`.
    pub fn add_route(&mut self, prefix: &Name, face: FaceId, cost: u64, multicast: bool) {
        let e = self
            .entries
            .entry(prefix.components().to_vec())
            .or_insert_with(|| FibEntry {
                prefix: prefix.clone(),
                faces: Vec::new(),
                multicast,
            });
        e.multicast |= multicast;
        if let Some(slot) = e.faces.iter_mut().find(|(f, _)| *f == face) {
            slot.1 = slot.1.min(cost);
        } else {
            e.faces.push((face, cost));
        }
        e.faces.sort_by_key(|(f, c)| (*c, *f));
    }

    pub fn remove_prefix(&mut self, prefix: &Name) -> Option<FibEntry> {
        self.entries.remove(prefix.components())
    }

    pub fn get(&self, prefix: &Name) -> Option<&FibEntry> {
        self.entries.get(prefix.components())
    }

    /// Longest-prefix match.
    pub fn lpm(&self, name: &Name) -> Option<&FibEntry> {
        let comps = name.components();
        (1..=comps.len()).rev().find_map(|n| self.entries.get(&comps[..n]))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries sorted by prefix.
    pub fn entries(&self) -> Vec<&FibEntry> {
        let mut v: Vec<&FibEntry> = self.entries.values().collect();
        v.sort_by(|a, b| a.prefix.cmp(&b.prefix));
        v
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitEntry {
    pub name: Name,
    pub downstream: BTreeSet<FaceId>,
    pub nonces: Vec<u64>,
    pub expiry: Time,
}

/// Outcome of recording an Interest in the PIT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PitInsert {
    /// First Interest for the name; forward it upstream.
    New,
    /// Face added to an existing entry; do not forward.
    Aggregated,
    /// `(name, nonce)` already seen; drop.
    Duplicate,
}

#[derive(Debug, Clone)]
pub struct Pit {
    lifetime: Time,
    entries: FxHashMap<Name, PitEntry>,
    expiries: VecDeque<(Time, Name)>,
    dead_nonces: FxHashSet<(Name, u64)>,
    dead_expiries: VecDeque<(Time, Name, u64)>,
}

impl Pit {
    pub fn new(lifetime: Time) -> Self {
        Self {
            lifetime,
            entries: FxHashMap::default(),
            expiries: VecDeque::new(),
            dead_nonces: FxHashSet::default(),
            dead_expiries: VecDeque::new(),
        }
    }

    pub fn lifetime(&self) -> Time {
        self.lifetime
    }

    fn remember_nonces(&mut self, now: Time, name: &Name, nonces: &[u64]) {
        for n in nonces {
            self.dead_nonces.insert((name.clone(), *n));
            self.dead_expiries.push_back((now + self.lifetime, name.clone(), *n));
        }
    }

    /// Drop expired entries and forgotten nonces.
    pub fn expire(&mut self, now: Time) -> usize {
        let mut expired = 0;
        while let Some((t, _)) = self.expiries.front() {
            if *t > now {
                break;
            }
            let (_, name) = self.expiries.pop_front().expect("front checked");
            if let Some(e) = self.entries.get(&name) {
                if e.expiry <= now {
                    let e = self.entries.remove(&name).expect("present");
                    self.remember_nonces(now, &name, &e.nonces);
                    expired += 1;
                }
            }
        }
        while let Some((t, _, _)) = self.dead_expiries.front() {
            if *t > now {
                break;
            }
            let (_, name, nonce) = self.dead_expiries.pop_front().expect("front checked");
            self.dead_nonces.remove(&(name, nonce));
        }
        expired
    }

    pub fn insert(&mut self, now: Time, name: &Name, nonce: u64, face: FaceId) -> PitInsert {
        self.expire(now);
        if self.dead_nonces.contains(&(name.clone(), nonce)) {
            return PitInsert::Duplicate;
        }
        let expiry = now + self.lifetime;
        match self.entries.get_mut(name) {
            Some(e) => {
                if e.nonces.contains(&nonce) {
                    return PitInsert::Duplicate;
                }
                e.nonces.push(nonce);
                e.downstream.insert(face);
                if expiry > e.expiry {
                    e.expiry = expiry;
                    self.expiries.push_back((expiry, name.clone()));
                }
                PitInsert::Aggregated
            }
            None => {
                self.entries.insert(
                    name.clone(),
                    PitEntry {
                        name: name.clone(),
                        downstream: [face].into(),
                        nonces: vec![nonce],
                        expiry,
                    },
                );
                self.expiries.push_back((expiry, name.clone()));
                PitInsert::New
            }
        }
    }

    /// Consume the entry matching a Data name.
    pub fn take(&mut self, now: Time, name: &Name) -> Option<PitEntry> {
        self.expire(now);
        let e = self.entries.remove(name)?;
        self.remember_nonces(now, name, &e.nonces);
        Some(e)
    }

    pub fn get(&self, name: &Name) -> Option<&PitEntry> {
        self.entries.get(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Bounded LRU cache of Data packets, served only while fresh.
#[derive(Debug)]
pub struct ContentStore {
    cache: Option<LruCache<Name, (Arc<Data>, Time)>>,
}

impl ContentStore {
    pub fn new(capacity: usize) -> Self {
        Self {
            cache: NonZeroUsize::new(capacity).map(LruCache::new),
        }
    }

    pub fn capacity(&self) -> usize {
        self.cache.as_ref().map_or(0, |c| c.cap().get())
    }

    pub fn len(&self) -> usize {
        self.cache.as_ref().map_or(0, LruCache::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Stores `data` unless its freshness period is zero.
    pub fn insert(&mut self, now: Time, data: Arc<Data>) -> bool {
        let Some(cache) = self.cache.as_mut() else {
            return false;
        };
        if data.freshness_ms == 0 {
            return false;
        }
        cache.put(data.name.clone(), (data, now));
        true
    }

    /// Fresh entry for `name`; stale entries are evicted on the spot.
    pub fn lookup(&mut self, now: Time, name: &Name) -> Option<Arc<Data>> {
        let cache = self.cache.as_mut()?;
        let (data, inserted) = cache.get(name)?;
        if inserted + data.freshness_ms * 1000 >= now {
            return Some(data.clone());
        }
        cache.pop(name);
        None
    }
}
