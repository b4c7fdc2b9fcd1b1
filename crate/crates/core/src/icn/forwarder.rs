use std::sync::Arc;

use crate::name::Name;

use super::packet::{Data, Interest, Packet};
use super::security::{verify_data, PacketVerifier};
use super::tables::{ContentStore, Fib, Pit, PitInsert};
use super::{FaceId, Time};

#[derive(Debug, Clone)]
pub struct ForwarderConfig {
    pub pit_lifetime: Time,
    pub cs_capacity: usize,
    pub verify_data: bool,
}

impl Default for ForwarderConfig {
    fn default() -> Self {
        Self {
            pit_lifetime: 4_000_000,
            cs_capacity: 256_000,
            verify_data: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ForwarderStats {
    pub interests_in: u64,
    pub data_in: u64,
    pub interests_out: u64,
    pub data_out: u64,
    pub cs_hits: u64,
    pub cs_misses: u64,
    pub aggregated: u64,
    pub drop_no_route: u64,
    pub drop_duplicate: u64,
    pub drop_bad_signature: u64,
    pub drop_unsolicited: u64,
}

impl ForwarderStats {
    pub fn drops(&self) -> u64 {
        self.drop_no_route + self.drop_duplicate + self.drop_bad_signature + self.drop_unsolicited
    }
}

/// Packet to transmit on a face.
#[derive(Debug, Clone)]
pub struct Send {
    pub face: FaceId,
    pub packet: Packet,
}

/// Name-based forwarding engine of one node.
///
/// Event-driven and externally serialized: each call applies one packet
/// arrival and returns the resulting transmissions.
pub struct Forwarder {
    pub fib: Fib,
    pit: Pit,
    cs: ContentStore,
    verifier: Option<Arc<dyn PacketVerifier>>,
    stats: ForwarderStats,
}

impl Forwarder {
    pub fn new(config: &ForwarderConfig, verifier: Option<Arc<dyn PacketVerifier>>) -> Self {
        Self {
            fib: Fib::default(),
            pit: Pit::new(config.pit_lifetime),
            cs: ContentStore::new(config.cs_capacity),
            verifier: if config.verify_data { verifier } else { None },
            stats: ForwarderStats::default(),
        }
    }

    pub fn stats(&self) -> &ForwarderStats {
        &self.stats
    }

    pub fn pit(&self) -> &Pit {
        &self.pit
    }

    pub fn cs(&self) -> &ContentStore {
        &self.cs
    }

    pub fn on_interest(&mut self, now: Time, face_in: FaceId, interest: Arc<Interest>) -> Vec<Send> {
        self.stats.interests_in += 1;
        if let Some(data) = self.cs.lookup(now, &interest.name) {
            self.stats.cs_hits += 1;
            self.stats.data_out += 1;
            return vec![Send {
                face: face_in,
                packet: Packet::Data(data),
            }];
        }
        if self.cs.capacity() > 0 {
            self.stats.cs_misses += 1;
        }
        let upstreams = match self.fib.lpm(&interest.name) {
            Some(e) => e.upstreams(face_in),
            None => Vec::new(),
        };
        if upstreams.is_empty() {
            self.stats.drop_no_route += 1;
            return Vec::new();
        }
        match self.pit.insert(now, &interest.name, interest.nonce, face_in) {
            PitInsert::Duplicate => {
                self.stats.drop_duplicate += 1;
                Vec::new()
            }
            PitInsert::Aggregated => {
                self.stats.aggregated += 1;
                Vec::new()
            }
            PitInsert::New => {
                self.stats.interests_out += upstreams.len() as u64;
                upstreams
                    .into_iter()
                    .map(|face| Send {
                        face,
                        packet: Packet::Interest(interest.clone()),
                    })
                    .collect()
            }
        }
    }

    pub fn on_data(&mut self, now: Time, face_in: FaceId, data: Arc<Data>) -> Vec<Send> {
        self.stats.data_in += 1;
        if let Some(v) = &self.verifier {
            if !verify_data(&data, v.as_ref()) {
                self.stats.drop_bad_signature += 1;
                return Vec::new();
            }
        }
        let Some(entry) = self.pit.take(now, &data.name) else {
            self.stats.drop_unsolicited += 1;
            return Vec::new();
        };
        self.cs.insert(now, data.clone());
        let out: Vec<Send> = entry
            .downstream
            .into_iter()
            .filter(|f| *f != face_in)
            .map(|face| Send {
                face,
                packet: Packet::Data(data.clone()),
            })
            .collect();
        self.stats.data_out += out.len() as u64;
        out
    }

    /// True if a pending entry exists for `name`.
    pub fn is_pending(&self, name: &Name) -> bool {
        self.pit.get(name).is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::icn::security::{sign_data, HmacSigner, KeyRegistry, TrustAnchor};

    fn n(s: &str) -> Name {
        Name::parse(s).unwrap()
    }

    fn setup() -> (Forwarder, HmacSigner) {
        let anchor = TrustAnchor::new([3; 32]);
        let loc = n("dbs#2/KEY");
        let mut reg = KeyRegistry::new(anchor.clone());
        reg.register(&anchor.issue(loc.clone(), [4; 32])).unwrap();
        let mut f = Forwarder::new(&ForwarderConfig::default(), Some(Arc::new(reg)));
        f.fib.add_route(&n("dbs#2"), 9, 1, false);
        f.fib.add_route(&n("index/notify"), 7, 1, true);
        f.fib.add_route(&n("index/notify"), 8, 1, true);
        (f, HmacSigner::new(loc, [4; 32]))
    }

    fn interest(name: &str, nonce: u64) -> Arc<Interest> {
        Arc::new(Interest::unsigned(n(name), nonce))
    }

    #[test]
    fn cache_hit_answers_locally() {
        let (mut f, signer) = setup();
        let name = "dbs#2/o/POI/17-v1";
        assert_eq!(f.on_interest(0, 1, interest(name, 1)).len(), 1);
        let d = Arc::new(sign_data(n(name), b"obj".to_vec(), 1000, &signer));
        assert_eq!(f.on_data(10, 9, d).len(), 1);
        let before = f.stats().interests_out;
        let out = f.on_interest(20, 2, interest(name, 2));
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].face, 2);
        assert!(matches!(out[0].packet, Packet::Data(_)));
        assert_eq!(f.stats().interests_out, before);
    }

    #[test]
    fn aggregation_then_multicast_of_data() {
        let (mut f, signer) = setup();
        let name = "dbs#2/o/POI/1-v1";
        assert_eq!(f.on_interest(0, 1, interest(name, 1)).len(), 1);
        assert!(f.on_interest(1, 2, interest(name, 2)).is_empty());
        assert!(f.on_interest(2, 3, interest(name, 3)).is_empty());
        assert_eq!(f.pit().get(&n(name)).unwrap().downstream, [1, 2, 3].into());
        let d = Arc::new(sign_data(n(name), vec![], 1000, &signer));
        let out = f.on_data(5, 9, d);
        assert_eq!(out.iter().map(|s| s.face).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(f.pit().get(&n(name)).is_none());
    }

    #[test]
    fn multicast_prefix_fans_out() {
        let (mut f, _) = setup();
        let out = f.on_interest(0, 1, interest("index/notify/dbs#1/version=3", 1));
        assert_eq!(out.iter().map(|s| s.face).collect::<Vec<_>>(), vec![7, 8]);
        let out = f.on_interest(0, 7, interest("index/notify/dbs#1/version=4", 2));
        assert_eq!(out.iter().map(|s| s.face).collect::<Vec<_>>(), vec![8]);
    }

    #[test]
    fn zero_freshness_is_not_cached() {
        let (mut f, signer) = setup();
        let name = "dbs#2/q/POI/x/1";
        f.on_interest(0, 1, interest(name, 1));
        f.on_data(1, 9, Arc::new(sign_data(n(name), vec![], 0, &signer)));
        assert_eq!(f.cs().len(), 0);
    }

    #[test]
    fn drops_are_counted() {
        let (mut f, signer) = setup();
        assert!(f.on_interest(0, 1, interest("nowhere/x", 1)).is_empty());
        assert_eq!(f.stats().drop_no_route, 1);
        let name = "dbs#2/o/POI/1-v1";
        f.on_interest(0, 1, interest(name, 5));
        assert!(f.on_interest(0, 2, interest(name, 5)).is_empty());
        assert_eq!(f.stats().drop_duplicate, 1);
        let mut d = sign_data(n(name), b"abc".to_vec(), 1000, &signer);
        d.payload[0] ^= 0xff;
        assert!(f.on_data(1, 9, Arc::new(d)).is_empty());
        assert_eq!(f.stats().drop_bad_signature, 1);
        assert!(f.is_pending(&n(name)));
        let other = sign_data(n("dbs#2/o/POI/2-v1"), vec![], 1000, &signer);
        assert!(f.on_data(1, 9, Arc::new(other)).is_empty());
        assert_eq!(f.stats().drop_unsolicited, 1);
    }

    #[test]
    fn late_data_after_pit_expiry_is_dropped() {
        let (mut f, signer) = setup();
        let name = "dbs#2/o/POI/1-v1";
        f.on_interest(0, 1, interest(name, 1));
        let out = f.on_data(4_000_001, 9, Arc::new(sign_data(n(name), vec![], 1000, &signer)));
        assert!(out.is_empty());
        assert_eq!(f.stats().drop_unsolicited, 1);
    }
}
