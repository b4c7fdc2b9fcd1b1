//! Scenario configuration, loaded from a flat TOML key/value file.
//!
//! Every key is optional; missing keys take the defaults below.
//!
//! ```toml
//! seed = 1
//! sites = 3
//! dialects = "A,B,B"          # cycled over sites
//! levels = 3
//! k = 100                     # 0 advertises the finest unconstrained grid
//! sync_interval_ms = 1000
//! query_timeout_ms = 4000
//! object_timeout_ms = 1000
//! fetch_parallelism = 16
//! object_freshness_ms = 60000
//! cache = true
//! cs_capacity = 256000
//! pit_lifetime_ms = 4000
//! mode = "routing"            # or "flooding"
//! strict = false
//! latency_ms = 1.0
//! bandwidth_bytes_per_ms = 12500.0
//! servers = 4
//! queue = 1000
//! query_base_ms = 20.0
//! per_match_ms = 0.5
//! get_ms = 2.0
//! dialect_a = 1.0
//! dialect_b = 1.25
//! queries = 5000
//! rate = 50.0
//! area_km2 = 100.0
//! bbox = [-10.0, 35.0, 40.0, 70.0]
//! warmup_ms = 3000
//! dataset = ""                # GeoJSON/CSV path; empty generates POIs
//! pois = 10000
//! regions = 12
//! locality = "random"         # or "region"
//! trials = 3
//! stability_window = 0.8
//! stability_theta = 0.0       # 0 uses mean response time / queries
//! min_rate = 5.0
//! rate_step = 1.05
//! max_probes = 40
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::federation::RoutingMode;
use crate::store::Dialect;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Locality {
    #[default]
    Random,
    Region,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Routing,
    Flooding,
}

impl From<Mode> for RoutingMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Routing => RoutingMode::Routing,
            Mode::Flooding => RoutingMode::Flooding,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub sites: usize,
    pub dialects: String,
    pub levels: u8,
    pub k: usize,
    pub sync_interval_ms: u64,
    pub query_timeout_ms: u64,
    pub object_timeout_ms: u64,
    pub fetch_parallelism: usize,
    pub object_freshness_ms: u64,
    pub cache: bool,
    pub cs_capacity: usize,
    pub pit_lifetime_ms: u64,
    pub mode: Mode,
    pub strict: bool,
    pub latency_ms: f64,
    pub bandwidth_bytes_per_ms: f64,
    pub servers: usize,
    pub queue: usize,
    pub query_base_ms: f64,
    pub per_match_ms: f64,
    pub get_ms: f64,
    pub dialect_a: f64,
    pub dialect_b: f64,
    pub queries: usize,
    pub rate: f64,
    pub area_km2: f64,
    pub bbox: [f64; 4],
    pub warmup_ms: u64,
    pub dataset: String,
    pub pois: usize,
    pub regions: usize,
    pub locality: Locality,
    pub trials: usize,
    pub stability_window: f64,
    pub stability_theta: f64,
    pub min_rate: f64,
    pub rate_step: f64,
    pub max_probes: usize,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            sites: 3,
            dialects: "A,B,B".into(),
            levels: 3,
            k: 100,
            sync_interval_ms: 1000,
            query_timeout_ms: 4000,
            object_timeout_ms: 1000,
            fetch_parallelism: 16,
            object_freshness_ms: 60_000,
            cache: true,
            cs_capacity: 256_000,
            pit_lifetime_ms: 4000,
            mode: Mode::Routing,
            strict: false,
            latency_ms: 1.0,
            bandwidth_bytes_per_ms: 12_500.0,
            servers: 4,
            queue: 1000,
            query_base_ms: 20.0,
            per_match_ms: 0.5,
            get_ms: 2.0,
            dialect_a: 1.0,
            dialect_b: 1.25,
            queries: 5000,
            rate: 50.0,
            area_km2: 100.0,
            bbox: [-10.0, 35.0, 40.0, 70.0],
            warmup_ms: 3000,
            dataset: String::new(),
            pois: 10_000,
            regions: 12,
            locality: Locality::Random,
            trials: 3,
            stability_window: 0.8,
            stability_theta: 0.0,
            min_rate: 5.0,
            rate_step: 1.05,
            max_probes: 40,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn dialect_list(&self) -> Result<Vec<Dialect>, ConfigError> {
        self.dialects
            .split(',')
            .map(|s| s.trim().parse().map_err(|_| ConfigError::Invalid(format!("dialect {s:?}"))))
            .collect()
    }

    /// Dialect of site `i` (dialects are cycled).
    pub fn dialect_of(&self, i: usize) -> Dialect {
        let list = self.dialect_list().expect("validated");
        list[i % list.len()]
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if self.sites == 0 {
            return bad("sites must be positive");
        }
        if self.dialect_list()?.is_empty() {
            return bad("no dialects");
        }
        if !(1..=8).contains(&self.levels) {
            return bad("levels must be in 1..=8");
        }
        if self.latency_ms <= 0.0 || self.bandwidth_bytes_per_ms <= 0.0 {
            return bad("links need positive latency and bandwidth");
        }
        if self.servers == 0 {
            return bad("servers must be positive");
        }
        if self.rate <= 0.0 || self.min_rate <= 0.0 || self.rate_step <= 1.0 {
            return bad("rates must be positive and the step above 1");
        }
        if self.area_km2 <= 0.0 {
            return bad("area must be positive");
        }
        let [a, b, c, d] = self.bbox;
        if !(a < c && b < d && a >= -180.0 && c < 180.0 && b >= -90.0 && d <= 90.0) {
            return bad("bbox must be [min_lon, min_lat, max_lon, max_lat] inside the world");
        }
        if !(0.0..1.0).contains(&(1.0 - self.stability_window)) || self.stability_window <= 0.0 {
            return bad("stability_window must be in (0, 1]");
        }
        if self.trials == 0 || self.fetch_parallelism == 0 {
            return bad("trials and fetch_parallelism must be positive");
        }
        Ok(())
    }
}
