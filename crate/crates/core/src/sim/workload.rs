//! Query workload: Poisson arrivals of square range queries.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp};

use crate::geo::Rect;
use crate::icn::Time;
use crate::store::QueryStatement;

pub const KM_PER_DEGREE: f64 = 111.32;
pub const QUERY_DID: &str = "POI";

#[derive(Debug, Clone, PartialEq)]
pub struct QueryEvent {
    pub at: Time,
    pub site: usize,
    pub stmt: QueryStatement,
}

/// Square of `area_km2` centred at `(lon, lat)`, in degrees, clamped to the
/// world.
pub fn square_area(lon: f64, lat: f64, area_km2: f64) -> Rect {
    let side = area_km2.sqrt();
    let dlat = side / KM_PER_DEGREE / 2.0;
    let dlon = side / (KM_PER_DEGREE * lat.to_radians().cos().max(1e-6)) / 2.0;
    Rect::from_bounds(
        (lon - dlon).max(-180.0),
        (lat - dlat).max(-90.0),
        (lon + dlon).min(179.999_999_999),
        (lat + dlat).min(90.0),
    )
    .expect("clamped bounds are valid")
}

/// `n` queries starting after `start`, with exponential inter-arrival times
/// of mean `1/rate` seconds, centres uniform in `bbox`, sites uniform.
pub fn gen_queries(n: usize, rate: f64, area_km2: f64, bbox: [f64; 4], sites: usize, start: Time, seed: u64) -> Vec<QueryEvent> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap = Exp::new(rate).expect("positive rate");
    let mut t = start as f64;
    (0..n)
        .map(|_| {
            t += gap.sample(&mut rng) * 1e6;
            let lon = rng.gen_range(bbox[0]..bbox[2]);
            let lat = rng.gen_range(bbox[1]..bbox[3]);
            QueryEvent {
                at: t.round() as Time,
                site: rng.gen_range(0..sites),
                stmt: QueryStatement::new(QUERY_DID, square_area(lon, lat, area_km2)),
            }
        })
        .collect()
}
