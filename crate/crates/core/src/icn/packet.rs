//! Interest and Data packets and their TLV wire encoding.
//!
//! Layout (type byte, variable-length number, value):
//!
//! ```text
//! Interest     0x05 L  Name Nonce [KeyLocator Signature]
//! Data         0x06 L  Name Freshness Content KeyLocator Signature
//! Name         0x07 L  Component*
//! Component    0x08 L  utf-8 bytes
//! Nonce        0x0A 8  u64 big-endian
//! Freshness    0x19 L  minimal big-endian unsigned (ms)
//! Content      0x15 L  payload bytes
//! KeyLocator   0x1C L  Name
//! Signature    0x17 L  signature bytes
//! ```
//!
//! `L` is 1 byte below 253, `253` + u16, or `254` + u32. The signed portion
//! of a packet is its encoding without the outer header, the nonce and the
//! Signature element.

use std::sync::Arc;

use crate::name::Name;

pub const TLV_INTEREST: u8 = 0x05;
pub const TLV_DATA: u8 = 0x06;
pub const TLV_NAME: u8 = 0x07;
pub const TLV_COMPONENT: u8 = 0x08;
pub const TLV_NONCE: u8 = 0x0A;
pub const TLV_CONTENT: u8 = 0x15;
pub const TLV_SIGNATURE: u8 = 0x17;
pub const TLV_FRESHNESS: u8 = 0x19;
pub const TLV_KEY_LOCATOR: u8 = 0x1C;

/// Default maximum Data payload (a small 4 KB data unit).
pub const DEFAULT_MAX_PAYLOAD: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignatureBlock {
    pub key_locator: Name,
    pub value: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interest {
    pub name: Name,
    pub nonce: u64,
    pub signature: Option<SignatureBlock>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Data {
    pub name: Name,
    pub payload: Vec<u8>,
    pub freshness_ms: u64,
    pub signature: SignatureBlock,
}

#[derive(Debug, Clone)]
pub enum Packet {
    Interest(Arc<Interest>),
    Data(Arc<Data>),
}

impl Packet {
    pub fn name(&self) -> &Name {
        match self {
            Packet::Interest(i) => &i.name,
            Packet::Data(d) => &d.name,
        }
    }

    pub fn wire_len(&self) -> usize {
        match self {
            Packet::Interest(i) => i.wire_len(),
            Packet::Data(d) => d.wire_len(),
        }
    }
}

fn varnum_len(n: usize) -> usize {
    if n < 253 {
        1
    } else if n <= 0xFFFF {
        3
    } else {
        5
    }
}

fn tlv_len(value_len: usize) -> usize {
    1 + varnum_len(value_len) + value_len
}

fn put_varnum(buf: &mut Vec<u8>, n: usize) {
    if n < 253 {
        buf.push(n as u8);
    } else if n <= 0xFFFF {
        buf.push(253);
        buf.extend_from_slice(&(n as u16).to_be_bytes());
    } else {
        buf.push(254);
        buf.extend_from_slice(&(n as u32).to_be_bytes());
    }
}

fn put_tlv(buf: &mut Vec<u8>, t: u8, value: &[u8]) {
    buf.push(t);
    put_varnum(buf, value.len());
    buf.extend_from_slice(value);
}

fn name_value_len(name: &Name) -> usize {
    name.components().iter().map(|c| tlv_len(c.len())).sum()
}

fn put_name(buf: &mut Vec<u8>, t: u8, name: &Name) {
    buf.push(t);
    put_varnum(buf, name_value_len(name));
    for c in name.components() {
        put_tlv(buf, TLV_COMPONENT, c.as_bytes());
    }
}

fn name_len(name: &Name) -> usize {
    tlv_len(name_value_len(name))
}

fn freshness_bytes(ms: u64) -> Vec<u8> {
    let b = ms.to_be_bytes();
    let skip = b.iter().take_while(|x| **x == 0).count().min(7);
    b[skip..].to_vec()
}

impl Interest {
    pub fn unsigned(name: Name, nonce: u64) -> Self {
        Self {
            name,
            nonce,
            signature: None,
        }
    }

    /// Bytes covered by a signature under `key_locator`.
    pub fn signed_portion(name: &Name, key_locator: &Name) -> Vec<u8> {
        let mut buf = Vec::with_capacity(name_len(name) + name_len(key_locator));
        put_name(&mut buf, TLV_NAME, name);
        put_name(&mut buf, TLV_KEY_LOCATOR, key_locator);
        buf
    }

    fn value_len(&self) -> usize {
        let sig = self
            .signature
            .as_ref()
            .map_or(0, |s| name_len(&s.key_locator) + tlv_len(s.value.len()));
        name_len(&self.name) + tlv_len(8) + sig
    }

    pub fn wire_len(&self) -> usize {
        tlv_len(self.value_len())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.wire_len());
        buf.push(TLV_INTEREST);
        put_varnum(&mut buf, self.value_len());
        put_name(&mut buf, TLV_NAME, &self.name);
        put_tlv(&mut buf, TLV_NONCE, &self.nonce.to_be_bytes());
        if let Some(s) = &self.signature {
            put_name(&mut buf, TLV_KEY_LOCATOR, &s.key_locator);
            put_tlv(&mut buf, TLV_SIGNATURE, &s.value);
        }
        buf
    }
}

impl Data {
    pub fn signed_portion(name: &Name, payload: &[u8], freshness_ms: u64, key_locator: &Name) -> Vec<u8> {
        let fresh = freshness_bytes(freshness_ms);
        let mut buf =
            Vec::with_capacity(name_len(name) + tlv_len(fresh.len()) + tlv_len(payload.len()) + name_len(key_locator));
        put_name(&mut buf, TLV_NAME, name);
        put_tlv(&mut buf, TLV_FRESHNESS, &fresh);
        put_tlv(&mut buf, TLV_CONTENT, payload);
        put_name(&mut buf, TLV_KEY_LOCATOR, key_locator);
        buf
    }

    /// Signed portion of this packet as it currently stands.
    pub fn current_signed_portion(&self) -> Vec<u8> {
        Self::signed_portion(&self.name, &self.payload, self.freshness_ms, &self.signature.key_locator)
    }

    fn value_len(&self) -> usize {
        name_len(&self.name)
            + tlv_len(freshness_bytes(self.freshness_ms).len())
            + tlv_len(self.payload.len())
            + name_len(&self.signature.key_locator)
            + tlv_len(self.signature.value.len())
    }

    pub fn wire_len(&self) -> usize {
        tlv_len(self.value_len())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut buf = Vec::with_capacity(self.wire_len());
        buf.push(TLV_DATA);
        put_varnum(&mut buf, self.value_len());
        buf.extend_from_slice(&self.current_signed_portion());
        put_tlv(&mut buf, TLV_SIGNATURE, &self.signature.value);
        buf
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interest_layout() {
        let i = Interest::unsigned(Name::parse("a/bc").unwrap(), 0x0102030405060708);
        let wire = i.encode();
        assert_eq!(
            wire,
            [0x05, 19, 0x07, 7, 0x08, 1, b'a', 0x08, 2, b'b', b'c', 0x0A, 8, 1, 2, 3, 4, 5, 6, 7, 8]
        );
        assert_eq!(i.wire_len(), wire.len());
    }

    #[test]
    fn data_lengths_match_encoding() {
        for size in [0usize, 10, 252, 253, 4096, 70_000] {
            let d = Data {
                name: Name::parse("dbs#1/index/data/version=3/s0").unwrap(),
                payload: vec![7; size],
                freshness_ms: 60_000,
                signature: SignatureBlock {
                    key_locator: Name::parse("dbs#1/KEY").unwrap(),
                    value: vec![1; 32],
                },
            };
            assert_eq!(d.encode().len(), d.wire_len(), "payload {size}");
        }
    }

    #[test]
    fn freshness_is_minimal() {
        assert_eq!(freshness_bytes(0), vec![0]);
        assert_eq!(freshness_bytes(255), vec![255]);
        assert_eq!(freshness_bytes(256), vec![1, 0]);
    }
}
