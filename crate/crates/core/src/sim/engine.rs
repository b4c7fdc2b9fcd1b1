//! Discrete-event simulation of sites, ICN nodes and links.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, VecDeque};
use std::sync::Arc;

use crate::federation::{Action, FederatedResult, FederationError, Incoming, Membership, Service, Site, SiteConfig, SiteIdentity, Timer};
use crate::icn::{Data, Forwarder, ForwarderConfig, ForwarderStats, Interest, Packet, Time, TrustAnchor};
use crate::index::names::{index_data_prefix, notify_prefix, parse_gdata};
use crate::name::Name;
use crate::store::{Dialect, QueryStatement};

use super::metrics::{LinkRecord, QueryRecord, TrialMetrics};
use super::topology::{NodeKind, Topology, APP_FACE};

/// Database service times of a site: `servers` parallel workers in front
/// of a bounded FIFO waiting queue.
#[derive(Debug, Clone, PartialEq)]
pub struct ServiceModel {
    pub servers: usize,
    pub queue: usize,
    /// µs per query execution, plus `per_match` µs per matching object.
    pub query_base: f64,
    pub per_match: f64,
    /// µs per object read.
    pub get: f64,
    pub dialect_a: f64,
    pub dialect_b: f64,
}

impl Default for ServiceModel {
    fn default() -> Self {
        Self {
            servers: 4,
            queue: 1000,
            query_base: 20_000.0,
            per_match: 500.0,
            get: 2_000.0,
            dialect_a: 1.0,
            dialect_b: 1.25,
        }
    }
}

impl ServiceModel {
    pub fn service_time(&self, dialect: Dialect, service: Service) -> Time {
        let base = match service {
            Service::None => return 0,
            Service::Query { matched } => self.query_base + self.per_match * matched as f64,
            Service::Get => self.get,
        };
        let mult = match dialect {
            Dialect::A => self.dialect_a,
            Dialect::B => self.dialect_b,
        };
        (base * mult).round() as Time
    }
}

#[derive(Debug, Clone)]
enum Job {
    Reply(Arc<Data>),
    Local { qid: u64, names: Vec<Name> },
}

#[derive(Debug, Default)]
struct DbPool {
    busy: usize,
    waiting: VecDeque<(Time, Job)>,
}

#[derive(Debug, Clone)]
enum Event {
    Arrive { node: usize, face: u32, packet: Packet },
    App { site: usize, packet: Packet },
    Tick { site: usize },
    SiteTimer { site: usize, timer: Timer },
    Submit { query: usize, site: usize, user: String, stmt: QueryStatement },
    DbDone { site: usize, job: Job },
}

struct Scheduled {
    at: Time,
    seq: u64,
    event: Event,
}

impl PartialEq for Scheduled {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.seq) == (other.at, other.seq)
    }
}

impl Eq for Scheduled {}

impl PartialOrd for Scheduled {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scheduled {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        (other.at, other.seq).cmp(&(self.at, self.seq))
    }
}

#[derive(Debug, Clone, Default)]
struct LinkState {
    busy_until: [Time; 2],
    bytes: [u64; 2],
    packets: [u64; 2],
}

struct NodeState {
    fwd: Forwarder,
    /// Link index per face id (face 0 unused).
    face_links: Vec<usize>,
}

/// One federation: sites, ICN nodes and links under a single logical clock.
pub struct Simulation {
    now: Time,
    seq: u64,
    events: BinaryHeap<Scheduled>,
    topo: Topology,
    nodes: Vec<NodeState>,
    links: Vec<LinkState>,
    sites: Vec<Site>,
    site_nodes: Vec<usize>,
    dbs: Vec<DbPool>,
    membership: Membership,
    joined: BTreeSet<usize>,
    model: ServiceModel,
    sync_interval: Option<Time>,
    pending: BTreeMap<(usize, u64), usize>,
    outstanding: usize,
    records: BTreeMap<usize, QueryRecord>,
    results: Option<BTreeMap<usize, FederatedResult>>,
    rejected: u64,
    db_rejections: u64,
    gdata_bytes: u64,
    stop_on_timeout: bool,
    stopped: bool,
}

impl Simulation {
    pub fn new(topo: Topology, model: ServiceModel, fwd: &ForwarderConfig, anchor: TrustAnchor) -> Self {
        topo.validate().expect("valid topology");
        let membership = Membership::new(anchor);
        let nodes = (0..topo.nodes.len())
            .map(|n| {
                let mut face_links = vec![usize::MAX];
                face_links.extend(topo.faces(n).iter().map(|f| f.link));
                NodeState {
                    fwd: Forwarder::new(fwd, Some(Arc::new(membership.registry().clone()))),
                    face_links,
                }
            })
            .collect();
        Self {
            now: 0,
            seq: 0,
            events: BinaryHeap::new(),
            links: vec![LinkState::default(); topo.links.len()],
            topo,
            nodes,
            sites: Vec::new(),
            site_nodes: Vec::new(),
            dbs: Vec::new(),
            membership,
            joined: BTreeSet::new(),
            model,
            sync_interval: None,
            pending: BTreeMap::new(),
            outstanding: 0,
            records: BTreeMap::new(),
            results: None,
            rejected: 0,
            db_rejections: 0,
            gdata_bytes: 0,
            stop_on_timeout: false,
            stopped: false,
        }
    }

    pub fn now(&self) -> Time {
        self.now
    }

    /// Attach the next site to its topology node. Not yet a member.
    pub fn add_site(&mut self, cfg: SiteConfig, identity: SiteIdentity) -> usize {
        let i = self.sites.len();
        let node = self.topo.site_node(i).expect("topology has a node for every site");
        let site = Site::new(cfg, identity, self.membership.registry().clone());
        self.sites.push(site);
        self.site_nodes.push(node);
        self.dbs.push(DbPool::default());
        i
    }

    pub fn site(&self, i: usize) -> &Site {
        &self.sites[i]
    }

    pub fn site_mut(&mut self, i: usize) -> &mut Site {
        &mut self.sites[i]
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn forwarder(&self, node: usize) -> &Forwarder {
        &self.nodes[node].fwd
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    /// Admit site `i` with its certificate and install its routes in every
    /// node. Rejected sites leave all FIBs untouched; re-joins are no-ops.
    pub fn join(&mut self, i: usize, certificate: &crate::icn::Certificate) -> Result<(), FederationError> {
        let dbsid = self.sites[i].dbsid().to_string();
        self.membership.admit(&dbsid, certificate)?;
        self.joined.insert(i);
        let dest = self.site_nodes[i];
        for prefix in [Name::parse(&dbsid).expect("valid dbsid"), index_data_prefix(&dbsid)] {
            self.nodes[dest].fwd.fib.add_route(&prefix, APP_FACE, 0, false);
            for (node, face, cost) in self.topo.routes_to(dest) {
                self.nodes[node].fwd.fib.add_route(&prefix, face, cost, false);
            }
        }
        let members: BTreeSet<usize> = self.joined.iter().map(|s| self.site_nodes[*s]).collect();
        let notify = notify_prefix();
        for node in 0..self.nodes.len() {
            for face in self.topo.multicast_faces(node, &members) {
                self.nodes[node].fwd.fib.add_route(&notify, face, 0, true);
            }
        }
        let ids: Vec<String> = self.joined.iter().map(|s| self.sites[*s].dbsid().to_string()).collect();
        for s in &self.joined {
            for id in &ids {
                self.sites[*s].add_member(id);
            }
        }
        Ok(())
    }

    /// Keep every returned [`FederatedResult`], for inspection by tests.
    pub fn keep_results(&mut self) {
        self.results.get_or_insert_with(BTreeMap::new);
    }

    pub fn results(&self) -> Option<&BTreeMap<usize, FederatedResult>> {
        self.results.as_ref()
    }

    fn schedule(&mut self, at: Time, event: Event) {
        self.seq += 1;
        self.events.push(Scheduled {
            at,
            seq: self.seq,
            event,
        });
    }

    /// Periodic index ticks, staggered across sites within one interval.
    pub fn start_index_sync(&mut self, interval: Time) {
        self.sync_interval = Some(interval);
        let n = self.sites.len() as Time;
        for i in 0..self.sites.len() {
            let at = self.now + interval * i as Time / n.max(1);
            self.schedule(at, Event::Tick { site: i });
        }
    }

    /// Queue a query submission; `query` is the caller's identifier.
    pub fn submit_at(&mut self, at: Time, query: usize, site: usize, user: &str, stmt: QueryStatement) {
        self.outstanding += 1;
        self.schedule(
            at,
            Event::Submit {
                query,
                site,
                user: user.to_string(),
                stmt,
            },
        );
    }

    /// Queries submitted but not yet resolved or rejected.
    pub fn outstanding(&self) -> usize {
        self.outstanding
    }

    /// Process events up to and including time `end`.
    pub fn run_until(&mut self, end: Time) {
        while self.events.peek().is_some_and(|e| e.at <= end) {
            self.step();
        }
        self.now = self.now.max(end);
    }

    /// Make [`Simulation::run_queries`] return at the first timed-out query.
    pub fn stop_on_timeout(&mut self, stop: bool) {
        self.stop_on_timeout = stop;
    }

    /// Process events until every submitted query has finished.
    pub fn run_queries(&mut self) {
        while self.outstanding > 0 && !self.stopped && !self.events.is_empty() {
            self.step();
        }
    }

    fn step(&mut self) {
        let Some(s) = self.events.pop() else {
            return;
        };
        self.now = s.at;
        match s.event {
            Event::Arrive { node, face, packet } => self.on_packet(node, face, packet),
            Event::App { site, packet } => self.on_app(site, packet),
            Event::Tick { site } => {
                let actions = self.sites[site].index_tick(self.now);
                self.apply(site, actions);
                if let Some(iv) = self.sync_interval {
                    self.schedule(self.now + iv, Event::Tick { site });
                }
            }
            Event::SiteTimer { site, timer } => {
                let actions = self.sites[site].on_timer(self.now, timer);
                self.apply(site, actions);
            }
            Event::Submit { query, site, user, stmt } => match self.sites[site].submit(self.now, &user, stmt) {
                Ok((qid, actions)) => {
                    self.pending.insert((site, qid), query);
                    self.apply(site, actions);
                }
                Err(_) => {
                    self.rejected += 1;
                    self.outstanding -= 1;
                }
            },
            Event::DbDone { site, job } => {
                match job {
                    Job::Reply(data) => self.on_packet(self.site_nodes[site], APP_FACE, Packet::Data(data)),
                    Job::Local { qid, names } => {
                        let actions = self.sites[site].on_local_result(self.now, qid, names);
                        self.apply(site, actions);
                    }
                }
                let pool = &mut self.dbs[site];
                match pool.waiting.pop_front() {
                    Some((service, job)) => self.schedule(self.now + service, Event::DbDone { site, job }),
                    None => pool.busy -= 1,
                }
            }
        }
    }

    fn db_submit(&mut self, site: usize, service: Service, job: Job) {
        let t = self.model.service_time(self.sites[site].config().dialect, service);
        let pool = &mut self.dbs[site];
        if pool.busy < self.model.servers {
            pool.busy += 1;
            self.schedule(self.now + t, Event::DbDone { site, job });
        } else if pool.waiting.len() < self.model.queue {
            pool.waiting.push_back((t, job));
        } else {
            self.db_rejections += 1;
        }
    }

    fn apply(&mut self, site: usize, actions: Vec<Action>) {
        for a in actions {
            match a {
                Action::Send(i) => self.on_packet(self.site_nodes[site], APP_FACE, Packet::Interest(Arc::new(i))),
                Action::LocalQuery { qid, names } => {
                    let matched = names.len();
                    self.db_submit(site, Service::Query { matched }, Job::Local { qid, names });
                }
                Action::Timer(at, timer) => self.schedule(at, Event::SiteTimer { site, timer }),
                Action::Done(r) => self.record(site, r),
            }
        }
    }

    fn record(&mut self, site: usize, r: FederatedResult) {
        let Some(query) = self.pending.remove(&(site, r.qid)) else {
            return;
        };
        self.outstanding -= 1;
        self.stopped |= self.stop_on_timeout && r.timed_out;
        let false_positives = r.contacted.iter().filter(|s| r.answers.get(*s) == Some(&0)).count();
        self.records.insert(
            query,
            QueryRecord {
                id: query,
                site,
                submit: r.submitted,
                resolve: r.resolved,
                contacted: r.contacted.len(),
                objects: r.objects.len(),
                complete: r.complete,
                timed_out: r.timed_out,
                misses: r.misses,
                false_positives,
            },
        );
        if let Some(res) = self.results.as_mut() {
            res.insert(query, r);
        }
    }

    fn on_app(&mut self, site: usize, packet: Packet) {
        match packet {
            Packet::Interest(i) => match self.sites[site].on_interest(self.now, &i) {
                Incoming::Reply { data, service } => {
                    if service == Service::None {
                        self.on_packet(self.site_nodes[site], APP_FACE, Packet::Data(data));
                    } else {
                        self.db_submit(site, service, Job::Reply(data));
                    }
                }
                Incoming::Actions(actions) => self.apply(site, actions),
                Incoming::Silent => {}
            },
            Packet::Data(d) => {
                let actions = self.sites[site].on_data(self.now, &d);
                self.apply(site, actions);
            }
        }
    }

    fn on_packet(&mut self, node: usize, face: u32, packet: Packet) {
        let now = self.now;
        let fwd = &mut self.nodes[node].fwd;
        let sends = match packet {
            Packet::Interest(i) => fwd.on_interest(now, face, i),
            Packet::Data(d) => fwd.on_data(now, face, d),
        };
        for s in sends {
            self.transmit(node, s.face, s.packet);
        }
    }

    fn transmit(&mut self, node: usize, face: u32, packet: Packet) {
        if face == APP_FACE {
            if let NodeKind::Site(site) = self.topo.nodes[node] {
                self.schedule(self.now, Event::App { site, packet });
            }
            return;
        }
        let li = self.nodes[node].face_links[face as usize];
        let spec = self.topo.links[li];
        let (dir, to) = if spec.a == node { (0, spec.b) } else { (1, spec.a) };
        let size = packet.wire_len();
        if let Packet::Data(d) = &packet {
            if parse_gdata(&d.name).is_some() {
                self.gdata_bytes += size as u64;
            }
        }
        let tx = (size as f64 * 1000.0 / spec.bandwidth).ceil() as Time;
        let link = &mut self.links[li];
        let start = self.now.max(link.busy_until[dir]);
        link.busy_until[dir] = start + tx;
        link.bytes[dir] += size as u64;
        link.packets[dir] += 1;
        let at = start + tx + spec.latency;
        let in_face = self.topo.faces(to).iter().find(|f| f.link == li).expect("link is incident").id;
        self.schedule(
            at,
            Event::Arrive {
                node: to,
                face: in_face,
                packet,
            },
        );
    }

    /// Inject an Interest into a node as if received on `face`.
    pub fn inject_interest(&mut self, node: usize, face: u32, interest: Interest) {
        self.on_packet(node, face, Packet::Interest(Arc::new(interest)));
    }

    /// Inject a Data packet into a node as if received on `face`.
    pub fn inject_data(&mut self, node: usize, face: u32, data: Data) {
        self.on_packet(node, face, Packet::Data(Arc::new(data)));
    }

    /// Bytes and packets carried by link `li` in direction a→b (0) or b→a (1).
    pub fn link_load(&self, li: usize, dir: usize) -> (u64, u64) {
        (self.links[li].bytes[dir], self.links[li].packets[dir])
    }

    pub fn gdata_bytes(&self) -> u64 {
        self.gdata_bytes
    }

    pub fn forwarder_totals(&self) -> ForwarderStats {
        let mut t = ForwarderStats::default();
        for n in &self.nodes {
            let s = n.fwd.stats();
            t.interests_in += s.interests_in;
            t.data_in += s.data_in;
            t.interests_out += s.interests_out;
            t.data_out += s.data_out;
            t.cs_hits += s.cs_hits;
            t.cs_misses += s.cs_misses;
            t.aggregated += s.aggregated;
            t.drop_no_route += s.drop_no_route;
            t.drop_duplicate += s.drop_duplicate;
            t.drop_bad_signature += s.drop_bad_signature;
            t.drop_unsolicited += s.drop_unsolicited;
        }
        t
    }

    pub fn metrics(&self) -> TrialMetrics {
        let fwd = self.forwarder_totals();
        let mut links = Vec::new();
        for (i, (spec, st)) in self.topo.links.iter().zip(&self.links).enumerate() {
            links.push(LinkRecord {
                link: i,
                from: spec.a,
                to: spec.b,
                bytes: st.bytes[0],
                packets: st.packets[0],
            });
            links.push(LinkRecord {
                link: i,
                from: spec.b,
                to: spec.a,
                bytes: st.bytes[1],
                packets: st.packets[1],
            });
        }
        TrialMetrics {
            queries: self.records.values().cloned().collect(),
            rejected: self.rejected,
            db_rejections: self.db_rejections,
            site_queries: self
                .sites
                .iter()
                .map(|s| s.stats().qinterests_served + s.stats().local_queries)
                .collect(),
            cache_hits: fwd.cs_hits,
            cache_misses: fwd.cs_misses,
            packet_drops: fwd.drops(),
            bad_signatures: fwd.drop_bad_signature
                + self
                    .sites
                    .iter()
                    .map(|s| s.stats().bad_signatures + s.index().stats().bad_signatures)
                    .sum::<u64>(),
            links,
            gdata_bytes: self.gdata_bytes,
            announcement_bytes: self.sites.iter().map(|s| s.index().announcement_bytes() as u64).sum(),
            advertised_tiles: self.sites.iter().map(|s| s.index().local().tiles.len()).sum(),
            vinterests: self.sites.iter().map(|s| s.index().stats().vinterests_sent).sum(),
            between_phase_misses: self.sites.iter().map(|s| s.stats().between_phase_misses).sum(),
            end_time: self.now,
        }
    }
}
