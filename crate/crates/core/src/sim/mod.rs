//! Discrete-event simulation harness: scenarios, trials and capacity search.

mod capacity;
pub mod config;
pub mod dataset;
mod engine;
pub mod metrics;
pub mod topology;
pub mod workload;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::federation::{SiteConfig, SiteIdentity};
use crate::geo::Grid;
use crate::icn::{ForwarderConfig, TrustAnchor};
use crate::index::SyncConfig;
use crate::store::ingest::parse_dataset;
use crate::store::{Geometry, StoreError};

pub use capacity::{find_max_query_rate, probe_rate, CapacityResult, Probe};
pub use config::{ConfigError, Locality, Mode, ScenarioConfig};
pub use dataset::{assign, generate_pois, Assignment};
pub use engine::{ServiceModel, Simulation};
pub use metrics::{stability_test, MetricsError, QueryRecord, Stability, TrialMetrics};
pub use topology::{Topology, APP_FACE};
pub use workload::{gen_queries, square_area, QueryEvent};

const MS: u64 = 1000;

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("dataset: {0}")]
    Dataset(#[from] StoreError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("unstable already at the minimum rate {0} q/s")]
    UnstableAtMinimum(f64),
}

/// A validated configuration plus its site datasets, shared by all trials.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub cfg: ScenarioConfig,
    pub assignment: Assignment,
}

impl Scenario {
    /// Load or generate the dataset and spread it over the sites.
    pub fn new(cfg: ScenarioConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let records = if cfg.dataset.is_empty() {
            generate_pois(cfg.pois, cfg.regions, cfg.bbox, cfg.seed)
        } else {
            let text = std::fs::read_to_string(&cfg.dataset).map_err(ConfigError::Io)?;
            parse_dataset(&text)?.records
        };
        let assignment = assign(&records, cfg.sites, cfg.locality, cfg.seed);
        Ok(Self { cfg, assignment })
    }

    pub fn dbsid(i: usize) -> String {
        format!("db{i}")
    }

    pub fn service_model(&self) -> ServiceModel {
        let c = &self.cfg;
        ServiceModel {
            servers: c.servers,
            queue: c.queue,
            query_base: c.query_base_ms * MS as f64,
            per_match: c.per_match_ms * MS as f64,
            get: c.get_ms * MS as f64,
            dialect_a: c.dialect_a,
            dialect_b: c.dialect_b,
        }
    }

    pub fn site_config(&self, i: usize) -> SiteConfig {
        let c = &self.cfg;
        let mut s = SiteConfig::new(Self::dbsid(i), c.dialect_of(i));
        s.grid = Grid::new(c.levels).expect("validated levels");
        s.sync = SyncConfig {
            k: (c.k > 0).then_some(c.k),
            ..SyncConfig::default()
        };
        s.sync_interval = c.sync_interval_ms * MS;
        s.query_timeout = c.query_timeout_ms * MS;
        s.object_timeout = c.object_timeout_ms * MS;
        s.fetch_parallelism = c.fetch_parallelism;
        s.object_freshness_ms = c.object_freshness_ms;
        s.mode = c.mode.into();
        s.strict = c.strict;
        s.seed = c.seed.wrapping_mul(31).wrapping_add(i as u64);
        s
    }

    /// A federation with every site loaded and joined, clock at 0, index
    /// synchronization not yet started.
    pub fn build(&self) -> Simulation {
        let c = &self.cfg;
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed ^ 0x5eed_f00d);
        let mut key = [0u8; 32];
        rng.fill_bytes(&mut key);
        let anchor = TrustAnchor::new(key);
        let fwd = ForwarderConfig {
            pit_lifetime: c.pit_lifetime_ms * MS,
            cs_capacity: if c.cache { c.cs_capacity } else { 0 },
            verify_data: true,
        };
        let topo = Topology::star(c.sites, (c.latency_ms * MS as f64).round() as u64, c.bandwidth_bytes_per_ms);
        let mut sim = Simulation::new(topo, self.service_model(), &fwd, anchor.clone());
        for (i, records) in self.assignment.per_site.iter().enumerate() {
            rng.fill_bytes(&mut key);
            let id = SiteIdentity::issue(&anchor, &Self::dbsid(i), key);
            let cert = id.certificate.clone();
            let s = sim.add_site(self.site_config(i), id);
            let store = sim.site_mut(s).store_mut();
            for r in records {
                store
                    .insert(workload::QUERY_DID, &r.id, Geometry::Point(r.point), r.properties.clone())
                    .ok();
            }
            sim.join(s, &cert).expect("certificate issued by the anchor");
        }
        sim
    }

    /// One trial at `rate` q/s: warm-up, then the workload until every
    /// query is resolved or timed out.
    pub fn run_trial(&self, rate: f64, trial: u64) -> TrialMetrics {
        self.run_trial_with(rate, trial, |_| {}).0
    }

    /// Like [`Scenario::run_trial`], with a hook on the freshly built
    /// federation; also returns the simulation for inspection.
    pub fn run_trial_with(&self, rate: f64, trial: u64, setup: impl FnOnce(&mut Simulation)) -> (TrialMetrics, Simulation) {
        let c = &self.cfg;
        let mut sim = self.build();
        setup(&mut sim);
        sim.start_index_sync(c.sync_interval_ms * MS);
        let start = c.warmup_ms * MS;
        let seed = c.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ trial.wrapping_add(1);
        let queries = gen_queries(c.queries, rate, c.area_km2, c.bbox, c.sites, start, seed);
        for (n, q) in queries.into_iter().enumerate() {
            sim.submit_at(q.at, n, q.site, "user", q.stmt);
        }
        sim.run_until(start);
        sim.run_queries();
        (sim.metrics(), sim)
    }
}
