//! The neutral query statement and the two DBMS dialects it is translated to.
//!
//! Neutral canonical form is compact JSON with sorted keys:
//!
//! ```text
//! {"area":[min_lon,min_lat,max_lon,max_lat],"did":"POI","filters":{"type":"hotel"}}
//! ```
//!
//! Floats use the shortest representation that parses back to the same
//! value, so the encoding is byte-deterministic and round-trips exactly.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::geo::Rect;

use super::StoreError;

#[derive(Debug, Clone, PartialEq)]
pub struct QueryStatement {
    pub did: String,
    pub area: Rect,
    pub filters: BTreeMap<String, String>,
}

// field order is the canonical (sorted) key order
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Canonical {
    area: [f64; 4],
    did: String,
    filters: BTreeMap<String, String>,
}

fn bounds(r: &Rect) -> [f64; 4] {
    [r.min().lon(), r.min().lat(), r.max().lon(), r.max().lat()]
}

fn rect_from(b: [f64; 4]) -> Result<Rect, StoreError> {
    Rect::from_bounds(b[0], b[1], b[2], b[3]).map_err(|e| StoreError::Statement(e.to_string()))
}

impl QueryStatement {
    pub fn new(did: impl Into<String>, area: Rect) -> Self {
        Self {
            did: did.into(),
            area,
            filters: BTreeMap::new(),
        }
    }

    pub fn with_filter(mut self, key: impl Into<String>, value: impl Into<String>) -> Self {
        self.filters.insert(key.into(), value.into());
        self
    }

    pub fn encode(&self) -> String {
        let c = Canonical {
            area: bounds(&self.area),
            did: self.did.clone(),
            filters: self.filters.clone(),
        };
        serde_json::to_string(&c).expect("statement serializes")
    }

    pub fn decode(text: &str) -> Result<Self, StoreError> {
        let c: Canonical = serde_json::from_str(text).map_err(|e| StoreError::Statement(e.to_string()))?;
        if c.did.is_empty() {
            return Err(StoreError::Statement("empty did".into()));
        }
        Ok(Self {
            did: c.did,
            area: rect_from(c.area)?,
            filters: c.filters,
        })
    }
}

/// Statement dialect of a site's DBMS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Dialect {
    /// Document store with filter documents and `$geoIntersects` boxes.
    A,
    /// Bucket store with positional `where` pairs and a named bbox.
    B,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dialect::A => "A",
            Dialect::B => "B",
        })
    }
}

impl FromStr for Dialect {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Dialect::A),
            "B" | "b" => Ok(Dialect::B),
            _ => Err(StoreError::Statement(format!("unknown dialect {s:?}"))),
        }
    }
}

const PROP_PREFIX: &str = "properties.";

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BBox {
    xmax: f64,
    xmin: f64,
    ymax: f64,
    ymin: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BucketQuery {
    bbox: BBox,
    bucket: String,
    #[serde(rename = "where")]
    conditions: Vec<(String, String)>,
}

/// Render `stmt` in the dialect's native statement text.
pub fn translate(stmt: &QueryStatement, dialect: Dialect) -> String {
    let b = bounds(&stmt.area);
    match dialect {
        Dialect::A => {
            let mut filter = Map::new();
            filter.insert(
                "geometry".into(),
                json!({"$geoIntersects": {"$box": [[b[0], b[1]], [b[2], b[3]]]}}),
            );
            for (k, v) in &stmt.filters {
                filter.insert(format!("{PROP_PREFIX}{k}"), Value::String(v.clone()));
            }
            json!({"find": stmt.did, "filter": filter}).to_string()
        }
        Dialect::B => {
            let q = BucketQuery {
                bbox: BBox {
                    xmax: b[2],
                    xmin: b[0],
                    ymax: b[3],
                    ymin: b[1],
                },
                bucket: stmt.did.clone(),
                conditions: stmt.filters.iter().map(|(k, v)| (k.clone(), v.clone())).collect(),
            };
            serde_json::to_string(&q).expect("bucket query serializes")
        }
    }
}

/// Inverse of [`translate`].
pub fn parse_dialect(text: &str, dialect: Dialect) -> Result<QueryStatement, StoreError> {
    let bad = |m: &str| StoreError::Statement(format!("dialect {dialect}: {m}"));
    match dialect {
        Dialect::A => {
            let v: Value = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
            let obj = v.as_object().ok_or_else(|| bad("not an object"))?;
            if obj.len() != 2 {
                return Err(bad("unexpected keys"));
            }
            let did = obj.get("find").and_then(Value::as_str).ok_or_else(|| bad("missing find"))?;
            let filter = obj.get("filter").and_then(Value::as_object).ok_or_else(|| bad("missing filter"))?;
            let boxv = filter
                .get("geometry")
                .and_then(|g| g.get("$geoIntersects"))
                .and_then(|g| g.get("$box"))
                .ok_or_else(|| bad("missing $box"))?;
            let corners: [[f64; 2]; 2] = serde_json::from_value(boxv.clone()).map_err(|e| bad(&e.to_string()))?;
            let mut filters = BTreeMap::new();
            for (k, v) in filter {
                if k == "geometry" {
                    continue;
                }
                let key = k.strip_prefix(PROP_PREFIX).ok_or_else(|| bad("unknown filter key"))?;
                let val = v.as_str().ok_or_else(|| bad("non-string filter"))?;
                filters.insert(key.to_string(), val.to_string());
            }
            if did.is_empty() {
                return Err(bad("empty did"));
            }
            Ok(QueryStatement {
                did: did.to_string(),
                area: rect_from([corners[0][0], corners[0][1], corners[1][0], corners[1][1]])?,
                filters,
            })
        }
        Dialect::B => {
            let q: BucketQuery = serde_json::from_str(text).map_err(|e| bad(&e.to_string()))?;
            let mut filters = BTreeMap::new();
            for (k, v) in q.conditions {
                if filters.insert(k, v).is_some() {
                    return Err(bad("duplicate condition"));
                }
            }
            if q.bucket.is_empty() {
                return Err(bad("empty bucket"));
            }
            Ok(QueryStatement {
                did: q.bucket,
                area: rect_from([q.bbox.xmin, q.bbox.ymin, q.bbox.xmax, q.bbox.ymax])?,
                filters,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn stmt() -> QueryStatement {
        QueryStatement::new("POI", Rect::from_bounds(12.4, 41.8, 12.6, 41.95).unwrap())
            .with_filter("type", "hotel")
            .with_filter("stars", "4")
    }

    #[test]
    fn canonical_is_sorted_and_stable() {
        let s = stmt();
        assert_eq!(
            s.encode(),
            r#"{"area":[12.4,41.8,12.6,41.95],"did":"POI","filters":{"stars":"4","type":"hotel"}}"#
        );
        assert_eq!(QueryStatement::decode(&s.encode()).unwrap(), s);
        assert!(QueryStatement::decode(r#"{"area":[1,1,0,0],"did":"POI","filters":{}}"#).is_err());
        assert!(QueryStatement::decode("nope").is_err());
    }

    #[test]
    fn dialects_round_trip_and_differ() {
        let s = stmt();
        let a = translate(&s, Dialect::A);
        let b = translate(&s, Dialect::B);
        assert_ne!(a.as_bytes(), b.as_bytes());
        assert_eq!(parse_dialect(&a, Dialect::A).unwrap(), s);
        assert_eq!(parse_dialect(&b, Dialect::B).unwrap(), s);
        assert!(parse_dialect(&a, Dialect::B).is_err());
        assert!(parse_dialect(&b, Dialect::A).is_err());
        assert!(parse_dialect("[]", Dialect::A).is_err());
    }

    fn arb_stmt() -> impl Strategy<Value = QueryStatement> {
        (
            "[A-Za-z_]{1,6}",
            -180.0..170.0f64,
            -90.0..80.0f64,
            0.0..10.0f64,
            0.0..10.0f64,
            prop::collection::btree_map("[a-z.$ ]{1,5}", "[^\u{0}]{0,6}", 0..4),
        )
            .prop_map(|(did, x, y, w, h, filters)| QueryStatement {
                did,
                area: Rect::from_bounds(x, y, x + w, y + h).unwrap(),
                filters,
            })
    }

    proptest! {
        #[test]
        fn every_encoding_round_trips(s in arb_stmt()) {
            prop_assert_eq!(&QueryStatement::decode(&s.encode()).unwrap(), &s);
            for d in [Dialect::A, Dialect::B] {
                prop_assert_eq!(&parse_dialect(&translate(&s, d), d).unwrap(), &s);
            }
        }
    }
}
