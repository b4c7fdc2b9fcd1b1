//! Synthetic POI datasets and their assignment to sites.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::geo::Point;
use crate::store::ingest::PoiRecord;

use super::config::Locality;

pub const REGION_KEY: &str = "region";
const TYPES: [&str; 4] = ["hotel", "restaurant", "museum", "shop"];

/// Clustered POIs inside `bbox`. The box is split into `regions` cells of
/// uneven population; each region holds a few gaussian city clusters plus a
/// uniform background. Every record carries `region` and `type`.
pub fn generate_pois(n: usize, regions: usize, bbox: [f64; 4], seed: u64) -> Vec<PoiRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let regions = regions.max(1);
    let cols = (regions as f64).sqrt().ceil() as usize;
    let rows = regions.div_ceil(cols);
    let [x0, y0, x1, y1] = bbox;
    let (w, h) = ((x1 - x0) / cols as f64, (y1 - y0) / rows as f64);
    let cells: Vec<[f64; 4]> = (0..regions)
        .map(|r| {
            let (c, k) = (r % cols, r / cols);
            let (lx, ly) = (x0 + c as f64 * w, y0 + k as f64 * h);
            [lx, ly, lx + w, ly + h]
        })
        .collect();
    let weights: Vec<f64> = (0..regions).map(|_| rng.gen_range(0.2..1.0f64).powi(2)).collect();
    let total: f64 = weights.iter().sum();
    let mut counts: Vec<usize> = weights.iter().map(|w| (w / total * n as f64).floor() as usize).collect();
    let short = n - counts.iter().sum::<usize>();
    for i in 0..short {
        counts[i % regions] += 1;
    }
    let mut out = Vec::with_capacity(n);
    for (r, (cell, count)) in cells.iter().zip(counts).enumerate() {
        let [a, b, c, d] = *cell;
        let cities: Vec<(f64, f64, f64)> = (0..rng.gen_range(2..6))
            .map(|_| {
                (
                    rng.gen_range(a..c),
                    rng.gen_range(b..d),
                    rng.gen_range(0.05..0.4),
                )
            })
            .collect();
        for _ in 0..count {
            let (lon, lat) = if rng.gen_bool(0.8) {
                let (cx, cy, s) = cities[rng.gen_range(0..cities.len())];
                let g = Normal::new(0.0, s).expect("positive sigma");
                loop {
                    let (x, y) = (cx + g.sample(&mut rng), cy + g.sample(&mut rng));
                    if x >= a && x < c && y >= b && y < d {
                        break (x, y);
                    }
                }
            } else {
                (rng.gen_range(a..c), rng.gen_range(b..d))
            };
            let id = out.len().to_string();
            let properties = [
                (REGION_KEY.to_string(), format!("R{r:02}")),
                ("type".to_string(), TYPES[rng.gen_range(0..TYPES.len())].to_string()),
            ]
            .into();
            out.push(PoiRecord {
                id,
                point: Point::new(lon, lat).expect("inside the bounding box"),
                properties,
            });
        }
    }
    out
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Assignment {
    pub per_site: Vec<Vec<PoiRecord>>,
    /// Records without a region under region locality.
    pub rejected: usize,
}

/// Spread records over `sites` sites.
///
/// Random locality draws a site per record. Region locality packs whole
/// regions, largest first, each into the currently least-loaded site
/// (lowest index on ties).
pub fn assign(records: &[PoiRecord], sites: usize, locality: Locality, seed: u64) -> Assignment {
    let mut per_site = vec![Vec::new(); sites];
    let mut rejected = 0;
    match locality {
        Locality::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for r in records {
                per_site[rng.gen_range(0..sites)].push(r.clone());
            }
        }
        Locality::Region => {
            let mut groups: BTreeMap<&str, Vec<&PoiRecord>> = BTreeMap::new();
            for r in records {
                match r.properties.get(REGION_KEY) {
                    Some(g) => groups.entry(g.as_str()).or_default().push(r),
                    None => rejected += 1,
                }
            }
            let mut order: Vec<(&str, Vec<&PoiRecord>)> = groups.into_iter().collect();
            order.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
            for (_, members) in order {
                let target = (0..sites).min_by_key(|i| (per_site[*i].len(), *i)).expect("sites > 0");
                per_site[target].extend(members.into_iter().cloned());
            }
        }
    }
    Assignment { per_site, rejected }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: usize, region: Option<&str>) -> PoiRecord {
        PoiRecord {
            id: id.to_string(),
            point: Point::new(10.0, 45.0).unwrap(),
            properties: region.map(|r| (REGION_KEY.to_string(), r.to_string())).into_iter().collect(),
        }
    }

    #[test]
    fn region_packing() {
        let mut records = Vec::new();
        for (name, size) in [("a", 50), ("b", 30), ("c", 20), ("d", 20), ("e", 10)] {
            for _ in 0..size {
                records.push(rec(records.len(), Some(name)));
            }
        }
        records.push(rec(999, None));
        let a = assign(&records, 3, Locality::Region, 0);
        assert_eq!(a.rejected, 1);
        let regions = |s: &Vec<PoiRecord>| {
            let mut v: Vec<String> = s.iter().map(|r| r.properties[REGION_KEY].clone()).collect();
            v.dedup();
            v
        };
        // 50 -> s0, 30 -> s1, 20 -> s2, 20 -> s2 (20 < 30), 10 -> s1 (30 < 40)
        assert_eq!(regions(&a.per_site[0]), vec!["a"]);
        assert_eq!(regions(&a.per_site[1]), vec!["b", "e"]);
        assert_eq!(regions(&a.per_site[2]), vec!["c", "d"]);
    }

    #[test]
    fn random_conservation_and_determinism() {
        let records: Vec<PoiRecord> = (0..9000).map(|i| rec(i, None)).collect();
        let a = assign(&records, 3, Locality::Random, 5);
        assert_eq!(a.per_site.iter().map(Vec::len).sum::<usize>(), 9000);
        for s in &a.per_site {
            assert!((s.len() as i64 - 3000).abs() < 200, "{}", s.len());
        }
        assert_eq!(a, assign(&records, 3, Locality::Random, 5));
    }

    #[test]
    fn generator() {
        let bbox = [-10.0, 35.0, 40.0, 70.0];
        let p = generate_pois(5000, 12, bbox, 3);
        assert_eq!(p.len(), 5000);
        assert!(p.iter().all(|r| r.point.lon() >= -10.0 && r.point.lon() < 40.0));
        assert!(p.iter().all(|r| r.properties.contains_key(REGION_KEY)));
        assert_eq!(p, generate_pois(5000, 12, bbox, 3));
        let ids: std::collections::BTreeSet<&str> = p.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids.len(), 5000);
    }
}
