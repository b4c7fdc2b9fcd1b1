//! Federation sites: admission, the two-phase query processor, and the
//! producer side answering qInterests, oInterests and index requests.

mod membership;
pub mod qname;
mod site;

use std::collections::BTreeSet;

use thiserror::Error;

use crate::geo::Grid;
use crate::icn::Time;
use crate::index::SyncConfig;
use crate::store::Dialect;

pub use membership::{Membership, SharedRegistry, SiteIdentity};
pub use site::{Action, FederatedResult, Incoming, Service, Site, SiteStats, Timer};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FederationError {
    #[error("user {0} is not authorized")]
    Unauthorized(String),
    #[error("statement needs a {0}-byte name, over the budget of {1}")]
    StatementTooLong(usize, usize),
    #[error("certificate rejected for {0}")]
    BadCertificate(String),
    #[error("key locator {0} does not belong to {1}")]
    ForeignKey(String, String),
    #[error("malformed payload: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RoutingMode {
    /// Contact only the sites the global index selects.
    #[default]
    Routing,
    /// Contact every member.
    Flooding,
}

#[derive(Debug, Clone)]
pub struct SiteConfig {
    pub dbsid: String,
    pub dialect: Dialect,
    pub grid: Grid,
    pub sync: SyncConfig,
    pub sync_interval: Time,
    pub query_timeout: Time,
    /// Silence on an oInterest for this long counts as a between-phases miss.
    pub object_timeout: Time,
    pub fetch_parallelism: usize,
    pub object_freshness_ms: u64,
    pub mode: RoutingMode,
    /// Fail (flag incomplete) queries with between-phases misses.
    pub strict: bool,
    /// Users allowed to query through this front end; `None` admits all.
    pub allowlist: Option<BTreeSet<String>>,
    pub name_budget: usize,
    pub max_payload: usize,
    /// Seed of the site's nonce generator.
    pub seed: u64,
}

impl SiteConfig {
    pub fn new(dbsid: impl Into<String>, dialect: Dialect) -> Self {
        Self {
            dbsid: dbsid.into(),
            dialect,
            grid: Grid::default(),
            sync: SyncConfig::default(),
            sync_interval: 1_000_000,
            query_timeout: 4_000_000,
            object_timeout: 1_000_000,
            fetch_parallelism: 16,
            object_freshness_ms: 60_000,
            mode: RoutingMode::Routing,
            strict: false,
            allowlist: None,
            name_budget: 3_500,
            max_payload: crate::icn::DEFAULT_MAX_PAYLOAD,
            seed: 0,
        }
    }
}
