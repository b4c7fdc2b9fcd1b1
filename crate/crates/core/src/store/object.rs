use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::geo::{Grid, Point, Rect, Tile, TileRange};
use crate::name::Name;

use super::StoreError;

/// Object geometry. `Tile` is used by the global index, whose squares have
/// decimal edges and must be intersected exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Geometry {
    Point(Point),
    Rect(Rect),
    Tile(Tile),
}

impl Geometry {
    pub fn intersects(&self, area: &Rect) -> bool {
        match self {
            Geometry::Point(p) => area.contains_point(p),
            Geometry::Rect(r) => area.intersects(r),
            Geometry::Tile(t) => t.intersects_rect(area),
        }
    }

    /// Cells of `level` touching the geometry's closed extent.
    pub fn cells(&self, grid: &Grid, level: u8) -> TileRange {
        match self {
            Geometry::Point(p) => grid.tiles_covering(&Rect::point(*p), level).expect("level checked by store"),
            Geometry::Rect(r) => grid.tiles_covering(r, level).expect("level checked by store"),
            Geometry::Tile(t) => t.covering_at(level),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialObject {
    pub oname: Name,
    pub did: String,
    pub id: String,
    pub geometry: Geometry,
    pub properties: BTreeMap<String, String>,
    pub version: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type")]
enum GeometryRecord {
    Point { coordinates: [f64; 2] },
    Rect { bbox: [f64; 4] },
    Tile { tile: String },
}

#[derive(Serialize, Deserialize)]
struct ObjectRecord {
    oname: String,
    did: String,
    id: String,
    version: u32,
    geometry: GeometryRecord,
    properties: BTreeMap<String, String>,
}

impl SpatialObject {
    /// JSON encoding used as the oData payload.
    pub fn encode(&self) -> Vec<u8> {
        let geometry = match self.geometry {
            Geometry::Point(p) => GeometryRecord::Point {
                coordinates: [p.lon(), p.lat()],
            },
            Geometry::Rect(r) => GeometryRecord::Rect {
                bbox: [r.min().lon(), r.min().lat(), r.max().lon(), r.max().lat()],
            },
            Geometry::Tile(t) => GeometryRecord::Tile { tile: t.to_string() },
        };
        let rec = ObjectRecord {
            oname: self.oname.to_string(),
            did: self.did.clone(),
            id: self.id.clone(),
            version: self.version,
            geometry,
            properties: self.properties.clone(),
        };
        serde_json::to_vec(&rec).expect("object record serializes")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, StoreError> {
        let rec: ObjectRecord = serde_json::from_slice(bytes).map_err(|e| StoreError::Decode(e.to_string()))?;
        let bad = |e: &dyn std::fmt::Display| StoreError::Decode(e.to_string());
        let geometry = match rec.geometry {
            GeometryRecord::Point { coordinates: [x, y] } => Geometry::Point(Point::new(x, y).map_err(|e| bad(&e))?),
            GeometryRecord::Rect { bbox: [a, b, c, d] } => {
                Geometry::Rect(Rect::from_bounds(a, b, c, d).map_err(|e| bad(&e))?)
            }
            GeometryRecord::Tile { tile } => Geometry::Tile(tile.parse().map_err(|e| bad(&e))?),
        };
        Ok(SpatialObject {
            oname: Name::parse(&rec.oname).map_err(|e| bad(&e))?,
            did: rec.did,
            id: rec.id,
            geometry,
            properties: rec.properties,
            version: rec.version,
        })
    }

    /// The owning site, read from the first oName component.
    pub fn dbsid(&self) -> &str {
        self.oname.get(0).unwrap_or_default()
    }

    pub fn matches(&self, did: &str, area: &Rect, filters: &BTreeMap<String, String>) -> bool {
        self.did == did
            && self.geometry.intersects(area)
            && filters.iter().all(|(k, v)| self.properties.get(k) == Some(v))
    }
}
