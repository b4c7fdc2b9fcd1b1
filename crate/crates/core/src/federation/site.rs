use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;

use crate::icn::{sign_data, sign_interest, verify_data, verify_interest, Data, HmacSigner, Interest, Time};
use crate::index::names::{parse_gdata, parse_vinterest};
use crate::index::IndexSync;
use crate::name::Name;
use crate::store::{QueryStatement, SpatialObject, SpatialStore};

use super::qname::{chunk_name, encode_error, encode_name_list, parse_qname, QDataChunk, QName, QRequest};
use super::{FederationError, RoutingMode, SharedRegistry, SiteConfig, SiteIdentity};

/// Timers a site asks its event loop to schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Timer {
    QueryDeadline(u64),
    /// oName fetch started at the given time.
    ObjectDeadline(Name, Time),
}

/// Work a site hands back to its event loop.
#[derive(Debug, Clone)]
pub enum Action {
    /// Transmit through the site's forwarder.
    Send(Interest),
    /// Local database query whose result is ready once the database has
    /// served it; report back through [`Site::on_local_result`].
    LocalQuery { qid: u64, names: Vec<Name> },
    Timer(Time, Timer),
    Done(FederatedResult),
}

/// Database work needed before a reply may leave the site.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Service {
    None,
    Query { matched: usize },
    Get,
}

/// Outcome of an Interest delivered to the site application.
#[derive(Debug, Clone)]
pub enum Incoming {
    Reply { data: Arc<Data>, service: Service },
    Actions(Vec<Action>),
    Silent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FederatedResult {
    pub qid: u64,
    pub submitted: Time,
    pub names_done: Time,
    pub resolved: Time,
    /// Sorted by oName.
    pub objects: Vec<SpatialObject>,
    pub contacted: BTreeSet<String>,
    /// oNames listed by each contacted site that answered.
    pub answers: BTreeMap<String, usize>,
    /// Every contacted site answered and every listed oName was fetched
    /// (or, outside strict mode, was found missing between the phases).
    pub complete: bool,
    /// The query hit its deadline.
    pub timed_out: bool,
    pub misses: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SiteStats {
    pub queries_submitted: u64,
    pub queries_rejected: u64,
    pub queries_completed: u64,
    pub queries_incomplete: u64,
    pub local_queries: u64,
    pub qinterests_sent: u64,
    pub qchunk_interests_sent: u64,
    pub ointerests_sent: u64,
    pub qinterests_served: u64,
    pub ointerests_served: u64,
    pub ointerests_silent: u64,
    pub between_phase_misses: u64,
    pub bad_signatures: u64,
    pub malformed: u64,
}

#[derive(Debug, Clone, Default)]
struct SiteProgress {
    total: Option<u32>,
    received: BTreeSet<u32>,
}

#[derive(Debug, Clone)]
struct QueryState {
    submitted: Time,
    contacted: BTreeSet<String>,
    answers: BTreeMap<String, usize>,
    awaiting: BTreeMap<String, SiteProgress>,
    qnames: Vec<Name>,
    local_pending: bool,
    names_done: Option<Time>,
    queue: VecDeque<Name>,
    requested: BTreeSet<Name>,
    in_flight: BTreeSet<Name>,
    objects: BTreeMap<Name, SpatialObject>,
    misses: u32,
    failed: bool,
    timed_out: bool,
}

impl QueryState {
    fn names_phase_over(&self) -> bool {
        self.awaiting.is_empty() && !self.local_pending
    }

    fn finished(&self) -> bool {
        self.names_phase_over() && self.queue.is_empty() && self.in_flight.is_empty()
    }
}

pub struct Site {
    cfg: SiteConfig,
    store: SpatialStore,
    index: IndexSync,
    signer: HmacSigner,
    verifier: SharedRegistry,
    members: BTreeSet<String>,
    rng: ChaCha8Rng,
    next_qid: u64,
    queries: BTreeMap<u64, QueryState>,
    by_qname: FxHashMap<Name, (u64, String)>,
    /// oName → queries waiting for it, and when its fetch started.
    waiting: BTreeMap<Name, (Vec<u64>, Time)>,
    /// Continuation chunks of multi-packet qData, kept until expiry.
    retained: FxHashMap<Name, Arc<Data>>,
    retained_expiry: VecDeque<(Time, Vec<Name>)>,
    stats: SiteStats,
}

impl Site {
    pub fn new(cfg: SiteConfig, identity: SiteIdentity, verifier: SharedRegistry) -> Self {
        assert_eq!(cfg.dbsid, identity.dbsid, "identity issued for another site");
        let store = SpatialStore::new(cfg.dbsid.clone(), cfg.grid, cfg.dialect);
        let index = IndexSync::new(cfg.dbsid.clone(), cfg.grid, cfg.sync.clone());
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let members = [cfg.dbsid.clone()].into();
        Self {
            cfg,
            store,
            index,
            signer: identity.signer,
            verifier,
            members,
            rng,
            next_qid: 0,
            queries: BTreeMap::new(),
            by_qname: FxHashMap::default(),
            waiting: BTreeMap::new(),
            retained: FxHashMap::default(),
            retained_expiry: VecDeque::new(),
            stats: SiteStats::default(),
        }
    }

    pub fn dbsid(&self) -> &str {
        &self.cfg.dbsid
    }

    pub fn config(&self) -> &SiteConfig {
        &self.cfg
    }

    pub fn store(&self) -> &SpatialStore {
        &self.store
    }

    /// Home-site CRUD access.
    pub fn store_mut(&mut self) -> &mut SpatialStore {
        &mut self.store
    }

    pub fn index(&self) -> &IndexSync {
        &self.index
    }

    pub fn stats(&self) -> &SiteStats {
        &self.stats
    }

    pub fn members(&self) -> &BTreeSet<String> {
        &self.members
    }

    /// Record a federation member, used as the target set when flooding.
    pub fn add_member(&mut self, dbsid: &str) {
        self.members.insert(dbsid.to_string());
    }

    pub fn in_flight(&self) -> usize {
        self.queries.len()
    }

    /// Sites a query over `stmt` is sent to.
    pub fn targets(&self, stmt: &QueryStatement) -> BTreeSet<String> {
        match self.cfg.mode {
            RoutingMode::Routing => self.index.global().lookup(&stmt.area),
            RoutingMode::Flooding => self.members.clone(),
        }
    }

    /// Periodic index maintenance: recompute the tessellation and multicast
    /// the current version.
    pub fn index_tick(&mut self, _now: Time) -> Vec<Action> {
        self.index.refresh(&self.store, &self.signer);
        let nonce = self.rng.gen();
        self.index
            .advertisement(nonce, &self.signer)
            .map(Action::Send)
            .into_iter()
            .collect()
    }

    /// Start resolving `stmt` on behalf of `user`.
    pub fn submit(&mut self, now: Time, user: &str, stmt: QueryStatement) -> Result<(u64, Vec<Action>), FederationError> {
        if self.cfg.allowlist.as_ref().is_some_and(|a| !a.contains(user)) {
            self.stats.queries_rejected += 1;
            return Err(FederationError::Unauthorized(user.to_string()));
        }
        let probe = QName {
            dbsid: self.cfg.dbsid.clone(),
            stmt: stmt.clone(),
            nonce: u64::MAX,
        }
        .to_name()
        .to_string()
        .len();
        if probe > self.cfg.name_budget {
            self.stats.queries_rejected += 1;
            return Err(FederationError::StatementTooLong(probe, self.cfg.name_budget));
        }
        self.stats.queries_submitted += 1;
        let qid = self.next_qid;
        self.next_qid += 1;
        let targets = self.targets(&stmt);
        let mut actions = Vec::new();
        let mut q = QueryState {
            submitted: now,
            contacted: targets.clone(),
            answers: BTreeMap::new(),
            awaiting: BTreeMap::new(),
            qnames: Vec::new(),
            local_pending: false,
            names_done: None,
            queue: VecDeque::new(),
            requested: BTreeSet::new(),
            in_flight: BTreeSet::new(),
            objects: BTreeMap::new(),
            misses: 0,
            failed: false,
            timed_out: false,
        };
        for dbsid in &targets {
            if *dbsid == self.cfg.dbsid {
                q.local_pending = true;
                self.stats.local_queries += 1;
                actions.push(Action::LocalQuery {
                    qid,
                    names: self.store.query_onames(&stmt),
                });
                continue;
            }
            let name = QName {
                dbsid: dbsid.clone(),
                stmt: stmt.clone(),
                nonce: self.rng.gen(),
            }
            .to_name();
            self.by_qname.insert(name.clone(), (qid, dbsid.clone()));
            q.qnames.push(name.clone());
            q.awaiting.insert(dbsid.clone(), SiteProgress::default());
            self.stats.qinterests_sent += 1;
            actions.push(Action::Send(sign_interest(name, self.rng.gen(), &self.signer)));
        }
        actions.push(Action::Timer(now + self.cfg.query_timeout, Timer::QueryDeadline(qid)));
        self.queries.insert(qid, q);
        self.settle(now, qid, &mut actions);
        Ok((qid, actions))
    }

    /// Local names are resolved against the store directly; names that no
    /// longer resolve are between-phases misses.
    pub fn on_local_result(&mut self, now: Time, qid: u64, names: Vec<Name>) -> Vec<Action> {
        let mut actions = Vec::new();
        let Some(q) = self.queries.get_mut(&qid) else {
            return actions;
        };
        q.local_pending = false;
        q.answers.insert(self.cfg.dbsid.clone(), names.len());
        for n in names {
            match self.store.get(&n) {
                Ok(o) => {
                    q.objects.insert(n, o.clone());
                }
                Err(_) => {
                    q.misses += 1;
                    self.stats.between_phase_misses += 1;
                }
            }
        }
        self.settle(now, qid, &mut actions);
        actions
    }

    /// Interest delivered to the application face.
    pub fn on_interest(&mut self, now: Time, interest: &Interest) -> Incoming {
        if parse_vinterest(&interest.name).is_some() {
            let rng = &mut self.rng;
            let out = self
                .index
                .on_vinterest(now, interest, &self.verifier, &mut || rng.gen(), &self.signer);
            return Incoming::Actions(out.into_iter().map(Action::Send).collect());
        }
        if interest.name.get(0) != Some(self.cfg.dbsid.as_str()) {
            return Incoming::Silent;
        }
        if parse_gdata(&interest.name).is_some() {
            return match self.index.serve_ginterest(interest, &self.verifier) {
                Some(data) => Incoming::Reply {
                    data,
                    service: Service::None,
                },
                None => Incoming::Silent,
            };
        }
        match interest.name.get(1) {
            Some("q") => self.serve_qinterest(now, interest),
            Some("o") => self.serve_ointerest(interest),
            _ => Incoming::Silent,
        }
    }

    fn expire_retained(&mut self, now: Time) {
        while self.retained_expiry.front().is_some_and(|(t, _)| *t <= now) {
            let (_, names) = self.retained_expiry.pop_front().expect("front checked");
            for n in names {
                self.retained.remove(&n);
            }
        }
    }

    fn serve_qinterest(&mut self, now: Time, interest: &Interest) -> Incoming {
        self.expire_retained(now);
        let Some(req) = parse_qname(&interest.name) else {
            self.stats.malformed += 1;
            return Incoming::Silent;
        };
        if !verify_interest(interest, &self.verifier) {
            self.stats.bad_signatures += 1;
            return Incoming::Silent;
        }
        match req {
            QRequest::Chunk { .. } => match self.retained.get(&interest.name) {
                Some(d) => Incoming::Reply {
                    data: d.clone(),
                    service: Service::None,
                },
                None => Incoming::Silent,
            },
            QRequest::First(Err(msg)) => {
                self.stats.malformed += 1;
                let data = sign_data(interest.name.clone(), encode_error(&msg), 0, &self.signer);
                Incoming::Reply {
                    data: Arc::new(data),
                    service: Service::Query { matched: 0 },
                }
            }
            QRequest::First(Ok(q)) => {
                self.stats.qinterests_served += 1;
                let names = self.store.query_onames(&q.stmt);
                let matched = names.len();
                let mut chunks = encode_name_list(&names, self.cfg.max_payload).into_iter();
                let first = chunks.next().expect("at least one chunk");
                let mut kept = Vec::new();
                for (i, payload) in chunks.enumerate() {
                    let name = chunk_name(&interest.name, i as u32 + 1);
                    let d = Arc::new(sign_data(name.clone(), payload, 0, &self.signer));
                    self.retained.insert(name.clone(), d);
                    kept.push(name);
                }
                if !kept.is_empty() {
                    self.retained_expiry.push_back((now + self.cfg.query_timeout, kept));
                }
                let data = sign_data(interest.name.clone(), first, 0, &self.signer);
                Incoming::Reply {
                    data: Arc::new(data),
                    service: Service::Query { matched },
                }
            }
        }
    }

    fn serve_ointerest(&mut self, interest: &Interest) -> Incoming {
        match self.store.get(&interest.name) {
            Ok(o) => {
                self.stats.ointerests_served += 1;
                let data = sign_data(interest.name.clone(), o.encode(), self.cfg.object_freshness_ms, &self.signer);
                Incoming::Reply {
                    data: Arc::new(data),
                    service: Service::Get,
                }
            }
            Err(_) => {
                self.stats.ointerests_silent += 1;
                Incoming::Silent
            }
        }
    }

    /// Data delivered to the application face.
    pub fn on_data(&mut self, now: Time, data: &Data) -> Vec<Action> {
        if parse_gdata(&data.name).is_some() {
            let rng = &mut self.rng;
            let out = self.index.on_gdata(data, &self.verifier, &mut || rng.gen(), &self.signer);
            return out.into_iter().map(Action::Send).collect();
        }
        match parse_qname(&data.name) {
            Some(QRequest::First(_)) => self.on_qdata(now, &data.name.clone(), 0, data),
            Some(QRequest::Chunk { base, seq }) => self.on_qdata(now, &base, seq, data),
            None => self.on_odata(now, data),
        }
    }

    fn on_qdata(&mut self, now: Time, base: &Name, seq: u32, data: &Data) -> Vec<Action> {
        let mut actions = Vec::new();
        let Some((qid, dbsid)) = self.by_qname.get(base).cloned() else {
            return actions;
        };
        if !verify_data(data, &self.verifier) {
            self.stats.bad_signatures += 1;
            return actions;
        }
        let chunk = match QDataChunk::decode(&data.payload) {
            Ok(c) => c,
            Err(_) => {
                self.stats.malformed += 1;
                return actions;
            }
        };
        let q = self.queries.get_mut(&qid).expect("indexed query is live");
        let Some(progress) = q.awaiting.get_mut(&dbsid) else {
            return actions;
        };
        if progress.total.is_none() {
            progress.total = Some(chunk.total);
            for s in 1..chunk.total {
                self.stats.qchunk_interests_sent += 1;
                let name = chunk_name(base, s);
                actions.push(Action::Send(sign_interest(name, self.rng.gen(), &self.signer)));
            }
        }
        if chunk.error.is_some() {
            q.failed = true;
        }
        progress.received.insert(seq);
        *q.answers.entry(dbsid.clone()).or_default() += chunk.names.len();
        let done = progress.total.is_some_and(|t| progress.received.len() == t as usize);
        for s in &chunk.names {
            match Name::parse(s) {
                Ok(n) if n.get(0) == Some(dbsid.as_str()) => {
                    if q.requested.insert(n.clone()) {
                        q.queue.push_back(n);
                    }
                }
                _ => self.stats.malformed += 1,
            }
        }
        if done {
            q.awaiting.remove(&dbsid);
            self.by_qname.remove(base);
        }
        self.settle(now, qid, &mut actions);
        actions
    }

    fn on_odata(&mut self, now: Time, data: &Data) -> Vec<Action> {
        let mut actions = Vec::new();
        let Some((waiters, _)) = self.waiting.remove(&data.name) else {
            return actions;
        };
        let object = if verify_data(data, &self.verifier) {
            SpatialObject::decode(&data.payload).ok().filter(|o| o.oname == data.name)
        } else {
            self.stats.bad_signatures += 1;
            None
        };
        if object.is_none() {
            self.stats.malformed += 1;
        }
        for qid in waiters {
            let Some(q) = self.queries.get_mut(&qid) else {
                continue;
            };
            q.in_flight.remove(&data.name);
            match &object {
                Some(o) => {
                    q.objects.insert(data.name.clone(), o.clone());
                }
                None => q.misses += 1,
            }
            self.settle(now, qid, &mut actions);
        }
        actions
    }

    pub fn on_timer(&mut self, now: Time, timer: Timer) -> Vec<Action> {
        let mut actions = Vec::new();
        match timer {
            Timer::QueryDeadline(qid) => {
                if let Some(q) = self.queries.get_mut(&qid) {
                    q.failed = true;
                    q.timed_out = true;
                    q.awaiting.clear();
                    q.local_pending = false;
                    q.queue.clear();
                    let names: Vec<Name> = std::mem::take(&mut q.in_flight).into_iter().collect();
                    for n in names {
                        if let Some((w, _)) = self.waiting.get_mut(&n) {
                            w.retain(|x| *x != qid);
                        }
                    }
                    self.settle(now, qid, &mut actions);
                }
            }
            Timer::ObjectDeadline(name, started) => {
                if self.waiting.get(&name).is_some_and(|(_, t)| *t == started) {
                    let (waiters, _) = self.waiting.remove(&name).expect("checked");
                    for qid in waiters {
                        if let Some(q) = self.queries.get_mut(&qid) {
                            q.in_flight.remove(&name);
                            q.misses += 1;
                            self.stats.between_phase_misses += 1;
                            self.settle(now, qid, &mut actions);
                        }
                    }
                }
            }
        }
        actions
    }

    /// Issue fetches up to the parallelism bound and finish the query when
    /// nothing is left.
    fn settle(&mut self, now: Time, qid: u64, actions: &mut Vec<Action>) {
        let Some(q) = self.queries.get_mut(&qid) else {
            return;
        };
        if q.names_done.is_none() && q.names_phase_over() {
            q.names_done = Some(now);
        }
        while q.in_flight.len() < self.cfg.fetch_parallelism {
            let Some(name) = q.queue.pop_front() else {
                break;
            };
            q.in_flight.insert(name.clone());
            match self.waiting.get_mut(&name) {
                Some((w, _)) => w.push(qid),
                None => {
                    self.waiting.insert(name.clone(), (vec![qid], now));
                    self.stats.ointerests_sent += 1;
                    actions.push(Action::Send(Interest::unsigned(name.clone(), self.rng.gen())));
                    actions.push(Action::Timer(
                        now + self.cfg.object_timeout,
                        Timer::ObjectDeadline(name, now),
                    ));
                }
            }
        }
        if !q.finished() {
            return;
        }
        let q = self.queries.remove(&qid).expect("present");
        for n in &q.qnames {
            self.by_qname.remove(n);
        }
        let complete = !q.failed && !(self.cfg.strict && q.misses > 0);
        if complete {
            self.stats.queries_completed += 1;
        } else {
            self.stats.queries_incomplete += 1;
        }
        actions.push(Action::Done(FederatedResult {
            qid,
            submitted: q.submitted,
            names_done: q.names_done.unwrap_or(now),
            resolved: now,
            objects: q.objects.into_values().collect(),
            contacted: q.contacted,
            answers: q.answers,
            complete,
            timed_out: q.timed_out,
            misses: q.misses,
        }));
    }
}
