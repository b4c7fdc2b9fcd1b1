//! qName grammar and the qData payload format.
//!
//! A qName is `{dbsid}/q/{did}/{stmt}/{nonce}` where `stmt` is the
//! percent-escaped canonical statement. When the name list does not fit in
//! one packet, the first reply (named by the qName itself) announces the
//! chunk count and the rest are fetched as `{qName}/s{n}`.

use percent_encoding::{percent_decode_str, utf8_percent_encode, NON_ALPHANUMERIC};
use serde::{Deserialize, Serialize};

use crate::name::Name;
use crate::store::QueryStatement;

use super::FederationError;

#[derive(Debug, Clone, PartialEq)]
pub struct QName {
    pub dbsid: String,
    pub stmt: QueryStatement,
    pub nonce: u64,
}

impl QName {
    pub fn to_name(&self) -> Name {
        let escaped = utf8_percent_encode(&self.stmt.encode(), NON_ALPHANUMERIC).to_string();
        Name::from_components([
            self.dbsid.as_str(),
            "q",
            self.stmt.did.as_str(),
            &escaped,
            &self.nonce.to_string(),
        ])
        .expect("escaped components contain no separator")
    }
}

/// Result of parsing a name under the `q` marker.
#[derive(Debug, Clone, PartialEq)]
pub enum QRequest {
    /// Chunk 0, carrying the statement.
    First(Result<QName, String>),
    /// Continuation chunk `n ≥ 1` of the reply to `base`.
    Chunk { base: Name, seq: u32 },
}

/// Parse `{dbsid}/q/...`. `None` if the name is not a qName at all.
pub fn parse_qname(name: &Name) -> Option<QRequest> {
    let c = name.components();
    if c.len() < 2 || c[1] != "q" {
        return None;
    }
    match c.len() {
        5 => Some(QRequest::First(decode_first(c))),
        6 => {
            let seq: u32 = c[5].strip_prefix('s')?.parse().ok()?;
            (seq >= 1).then(|| QRequest::Chunk {
                base: name.prefix(5).expect("6 components"),
                seq,
            })
        }
        _ => None,
    }
}

fn decode_first(c: &[String]) -> Result<QName, String> {
    let text = percent_decode_str(&c[3]).decode_utf8().map_err(|e| e.to_string())?;
    let stmt = QueryStatement::decode(&text).map_err(|e| e.to_string())?;
    if stmt.did != c[2] {
        return Err(format!("did {} does not match statement", c[2]));
    }
    let nonce = c[4].parse().map_err(|_| format!("bad nonce {:?}", c[4]))?;
    Ok(QName {
        dbsid: c[0].clone(),
        stmt,
        nonce,
    })
}

pub fn chunk_name(base: &Name, seq: u32) -> Name {
    base.child(format!("s{seq}")).expect("valid component")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QDataChunk {
    pub total: u32,
    pub names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl QDataChunk {
    pub fn encode(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("chunk serializes")
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, FederationError> {
        let c: QDataChunk = serde_json::from_slice(bytes).map_err(|e| FederationError::Malformed(e.to_string()))?;
        if c.total == 0 {
            return Err(FederationError::Malformed("zero chunk count".into()));
        }
        Ok(c)
    }
}

/// Split a sorted oName list into payloads of at most `max_payload` bytes.
/// Always returns at least one chunk.
pub fn encode_name_list(names: &[Name], max_payload: usize) -> Vec<Vec<u8>> {
    // `{"total":4294967295,"names":[]}` plus slack
    const OVERHEAD: usize = 40;
    let mut groups: Vec<Vec<String>> = vec![Vec::new()];
    let mut size = OVERHEAD;
    for n in names {
        let s = n.to_string();
        let cost = serde_json::to_string(&s).expect("string serializes").len() + 1;
        let last = groups.last_mut().expect("non-empty");
        if !last.is_empty() && size + cost > max_payload {
            groups.push(vec![s]);
            size = OVERHEAD + cost;
        } else {
            last.push(s);
            size += cost;
        }
    }
    let total = groups.len() as u32;
    groups
        .into_iter()
        .map(|names| QDataChunk { total, names, error: None }.encode())
        .collect()
}

pub fn encode_error(msg: &str) -> Vec<u8> {
    QDataChunk {
        total: 1,
        names: Vec::new(),
        error: Some(msg.to_string()),
    }
    .encode()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::Rect;

    fn stmt() -> QueryStatement {
        QueryStatement::new("POI", Rect::from_bounds(12.1, 41.8, 12.6, 42.0).unwrap()).with_filter("type", "hotel")
    }

    #[test]
    fn qname_round_trip() {
        let q = QName {
            dbsid: "dbs#2".into(),
            stmt: stmt(),
            nonce: 1234,
        };
        let name = q.to_name();
        assert_eq!(name.len(), 5);
        assert!(name.to_string().starts_with("dbs#2/q/POI/"));
        assert!(name.to_string().ends_with("/1234"));
        assert_eq!(parse_qname(&name), Some(QRequest::First(Ok(q))));
        let c = chunk_name(&name, 3);
        assert_eq!(parse_qname(&c), Some(QRequest::Chunk { base: name, seq: 3 }));
    }

    #[test]
    fn malformed_statement_is_reported() {
        let name = Name::parse("dbs#2/q/POI/%7Bnot%20json/1").unwrap();
        assert!(matches!(parse_qname(&name), Some(QRequest::First(Err(_)))));
        assert_eq!(parse_qname(&Name::parse("dbs#2/o/POI/1-v1").unwrap()), None);
        assert_eq!(parse_qname(&Name::parse("dbs#2/q/a/b/1/s0").unwrap()), None);
    }

    #[test]
    fn name_list_chunking() {
        let names: Vec<Name> = (0..500)
            .map(|i| Name::parse(&format!("dbs#1/o/POI/{i:05}-v1")).unwrap())
            .collect();
        let chunks = encode_name_list(&names, 4096);
        assert!(chunks.len() > 1);
        let mut back = Vec::new();
        for c in &chunks {
            assert!(c.len() <= 4096);
            let d = QDataChunk::decode(c).unwrap();
            assert_eq!(d.total as usize, chunks.len());
            back.extend(d.names);
        }
        assert_eq!(back, names.iter().map(|n| n.to_string()).collect::<Vec<_>>());
        let empty = encode_name_list(&[], 4096);
        assert_eq!(QDataChunk::decode(&empty[0]).unwrap().names.len(), 0);
        assert_eq!(QDataChunk::decode(&encode_error("x")).unwrap().error.as_deref(), Some("x"));
    }
}
