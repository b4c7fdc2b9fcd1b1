//! Dataset ingestion: GeoJSON `FeatureCollection`s of Point features and
//! CSV rows `lon,lat,key=value;key=value`.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::geo::Point;

use super::StoreError;

/// One point of interest ready to be inserted into a store.
#[derive(Debug, Clone, PartialEq)]
pub struct PoiRecord {
    pub id: String,
    pub point: Point,
    pub properties: BTreeMap<String, String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Ingested {
    pub records: Vec<PoiRecord>,
    /// Malformed features or rows that were skipped.
    pub rejected: usize,
}

fn valid_id(id: &str) -> bool {
    !id.is_empty() && !id.contains('/')
}

fn feature_record(idx: usize, f: &Value) -> Option<PoiRecord> {
    let geom = f.get("geometry")?;
    if geom.get("type")?.as_str()? != "Point" {
        return None;
    }
    let c = geom.get("coordinates")?.as_array()?;
    let point = Point::new(c.first()?.as_f64()?, c.get(1)?.as_f64()?).ok()?;
    let mut properties = BTreeMap::new();
    if let Some(p) = f.get("properties").and_then(Value::as_object) {
        for (k, v) in p {
            let v = match v {
                Value::String(s) => s.clone(),
                Value::Number(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
                Value::Null => continue,
                _ => return None,
            };
            properties.insert(k.clone(), v);
        }
    }
    let id = match f.get("id") {
        Some(Value::String(s)) => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => properties.get("id").cloned().unwrap_or_else(|| idx.to_string()),
    };
    valid_id(&id).then_some(PoiRecord { id, point, properties })
}

pub fn parse_geojson(text: &str) -> Result<Ingested, StoreError> {
    let v: Value = serde_json::from_str(text).map_err(|e| StoreError::Decode(e.to_string()))?;
    if v.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(StoreError::Decode("not a FeatureCollection".into()));
    }
    let features = v
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| StoreError::Decode("missing features".into()))?;
    let mut out = Ingested::default();
    for (i, f) in features.iter().enumerate() {
        match feature_record(i, f) {
            Some(r) => out.records.push(r),
            None => out.rejected += 1,
        }
    }
    Ok(out)
}

fn csv_record(idx: usize, rec: &csv::StringRecord) -> Option<PoiRecord> {
    let lon: f64 = rec.get(0)?.trim().parse().ok()?;
    let lat: f64 = rec.get(1)?.trim().parse().ok()?;
    let point = Point::new(lon, lat).ok()?;
    let mut properties = BTreeMap::new();
    if let Some(kv) = rec.get(2) {
        for pair in kv.split(';').filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=')?;
            properties.insert(k.to_string(), v.to_string());
        }
    }
    if rec.len() > 3 {
        return None;
    }
    let id = properties.get("id").cloned().unwrap_or_else(|| idx.to_string());
    valid_id(&id).then_some(PoiRecord { id, point, properties })
}

pub fn parse_csv(text: &str) -> Ingested {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let mut out = Ingested::default();
    for (i, rec) in reader.records().enumerate() {
        match rec.ok().and_then(|r| csv_record(i, &r)) {
            Some(r) => out.records.push(r),
            None => out.rejected += 1,
        }
    }
    out
}

/// Pick the parser from the content: JSON objects go to GeoJSON.
pub fn parse_dataset(text: &str) -> Result<Ingested, StoreError> {
    if text.trim_start().starts_with('{') {
        parse_geojson(text)
    } else {
        Ok(parse_csv(text))
    }
}

pub fn to_geojson(records: &[PoiRecord]) -> String {
    let features: Vec<Value> = records
        .iter()
        .map(|r| {
            json!({
                "type": "Feature",
                "id": r.id,
                "geometry": {"type": "Point", "coordinates": [r.point.lon(), r.point.lat()]},
                "properties": r.properties,
            })
        })
        .collect();
    serde_json::to_string_pretty(&json!({"type": "FeatureCollection", "features": features}))
        .expect("geojson serializes")
}
