//! Binary tessellation format carried by gData.
//!
//! Each chunk payload is a big-endian `u32` holding the total number of
//! chunks, followed by fixed-width `(level u8, ix u32, iy u32)` records.
//! Tiles are sorted and split across chunks in order.

use crate::geo::Tile;

use super::IndexError;

pub const TILE_RECORD_LEN: usize = 9;
const HEADER_LEN: usize = 4;

/// Tiles that fit in one chunk of `max_payload` bytes.
pub fn tiles_per_chunk(max_payload: usize) -> usize {
    (max_payload.saturating_sub(HEADER_LEN) / TILE_RECORD_LEN).max(1)
}

/// Encode sorted tiles into chunk payloads. An empty set still yields one
/// chunk so receivers learn the (empty) tessellation.
pub fn encode_chunks(tiles: &[Tile], max_payload: usize) -> Vec<Vec<u8>> {
    let mut sorted = tiles.to_vec();
    sorted.sort();
    let per = tiles_per_chunk(max_payload);
    let groups: Vec<&[Tile]> = if sorted.is_empty() {
        vec![&[]]
    } else {
        sorted.chunks(per).collect()
    };
    let total = groups.len() as u32;
    groups
        .into_iter()
        .map(|g| {
            let mut buf = Vec::with_capacity(HEADER_LEN + g.len() * TILE_RECORD_LEN);
            buf.extend_from_slice(&total.to_be_bytes());
            for t in g {
                buf.push(t.level);
                buf.extend_from_slice(&t.ix.to_be_bytes());
                buf.extend_from_slice(&t.iy.to_be_bytes());
            }
            buf
        })
        .collect()
}

/// Decode one chunk into `(total_chunks, tiles)`.
pub fn decode_chunk(payload: &[u8]) -> Result<(u32, Vec<Tile>), IndexError> {
    if payload.len() < HEADER_LEN || !(payload.len() - HEADER_LEN).is_multiple_of(TILE_RECORD_LEN) {
        return Err(IndexError::Malformed(format!("chunk length {}", payload.len())));
    }
    let total = u32::from_be_bytes(payload[..4].try_into().expect("4 bytes"));
    if total == 0 {
        return Err(IndexError::Malformed("zero chunk count".into()));
    }
    let tiles = payload[HEADER_LEN..]
        .chunks_exact(TILE_RECORD_LEN)
        .map(|r| {
            let ix = u32::from_be_bytes(r[1..5].try_into().expect("4 bytes"));
            let iy = u32::from_be_bytes(r[5..9].try_into().expect("4 bytes"));
            Tile::new(r[0], ix, iy).map_err(|e| IndexError::Malformed(e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((total, tiles))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn sizes() {
        assert_eq!(tiles_per_chunk(4096), 454);
        let tiles: Vec<Tile> = (0..1000).map(|i| Tile { level: 2, ix: i, iy: 7 }).collect();
        let chunks = encode_chunks(&tiles, 4096);
        assert_eq!(chunks.len(), 3);
        assert_eq!(chunks[0].len(), 4 + 454 * 9);
        assert_eq!(chunks[2].len(), 4 + 92 * 9);
        let empty = encode_chunks(&[], 4096);
        assert_eq!(empty, vec![vec![0, 0, 0, 1]]);
        assert_eq!(decode_chunk(&empty[0]).unwrap(), (1, vec![]));
    }

    #[test]
    fn rejects_garbage() {
        assert!(decode_chunk(&[0, 0]).is_err());
        assert!(decode_chunk(&[0, 0, 0, 1, 2]).is_err());
        assert!(decode_chunk(&[0, 0, 0, 0]).is_err());
        // level 0 ix out of range
        assert!(decode_chunk(&[0, 0, 0, 1, 0, 0, 0, 1, 104, 0, 0, 0, 0]).is_err());
    }

    proptest! {
        #[test]
        fn round_trip(raw in prop::collection::btree_set((0u32..36_000, 0u32..18_000), 0..1200), max in 13usize..5000) {
            let tiles: Vec<Tile> = raw.into_iter().map(|(ix, iy)| Tile { level: 2, ix, iy }).collect();
            let chunks = encode_chunks(&tiles, max);
            let mut back = Vec::new();
            for c in &chunks {
                prop_assert!(c.len() <= max);
                let (total, ts) = decode_chunk(c).unwrap();
                prop_assert_eq!(total as usize, chunks.len());
                back.extend(ts);
            }
            prop_assert_eq!(back, tiles);
        }
    }
}
