//! Name grammars of the index synchronization plane.

use crate::name::Name;

pub const NOTIFY_PREFIX: [&str; 2] = ["index", "notify"];

pub fn notify_prefix() -> Name {
    Name::from_components(NOTIFY_PREFIX).expect("static components")
}

/// `index/notify/{dbsid}/version={x}`
pub fn vinterest_name(dbsid: &str, version: u64) -> Name {
    Name::from_components(["index", "notify", dbsid, &format!("version={version}")]).expect("dbsid is a valid component")
}

pub fn parse_vinterest(name: &Name) -> Option<(String, u64)> {
    let c = name.components();
    if c.len() != 4 || c[0] != "index" || c[1] != "notify" {
        return None;
    }
    Some((c[2].clone(), parse_version(&c[3])?))
}

/// `{dbsid}/index/data`, the prefix each site announces for its index.
pub fn index_data_prefix(dbsid: &str) -> Name {
    Name::from_components([dbsid, "index", "data"]).expect("dbsid is a valid component")
}

/// `{dbsid}/index/data/version={x}/s{n}`
pub fn gdata_name(dbsid: &str, version: u64, seq: u32) -> Name {
    Name::from_components([dbsid, "index", "data", &format!("version={version}"), &format!("s{seq}")])
        .expect("dbsid is a valid component")
}

pub fn parse_gdata(name: &Name) -> Option<(String, u64, u32)> {
    let c = name.components();
    if c.len() != 5 || c[1] != "index" || c[2] != "data" {
        return None;
    }
    let seq = c[4].strip_prefix('s')?.parse().ok()?;
    Some((c[0].clone(), parse_version(&c[3])?, seq))
}

fn parse_version(s: &str) -> Option<u64> {
    s.strip_prefix("version=")?.parse().ok()
}
