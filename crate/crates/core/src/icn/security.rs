//! Data-centric packet security.
//!
//! The default scheme is HMAC-SHA256 over the packet's signed portion. A
//! trust anchor certifies each signer key by MACing `(key_locator, key)`;
//! the [`KeyRegistry`] accepts a key only if that certificate validates, so
//! the registry plays the role of a certificate chain of depth one.

use hmac::{Hmac, Mac};
use rustc_hash::FxHashMap;
use sha2::Sha256;
use thiserror::Error;

use crate::name::Name;

use super::packet::{Data, Interest, SignatureBlock};

type HmacSha256 = Hmac<Sha256>;

pub type KeyBytes = [u8; 32];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SecurityError {
    #[error("certificate for {0} does not validate against the trust anchor")]
    BadCertificate(String),
}

fn mac(key: &[u8], parts: &[&[u8]]) -> Vec<u8> {
    let mut m = HmacSha256::new_from_slice(key).expect("hmac accepts any key length");
    for p in parts {
        m.update(p);
    }
    m.finalize().into_bytes().to_vec()
}

fn mac_ok(key: &[u8], parts: &[&[u8]], tag: &[u8]) -> bool {
    let mut m = HmacSha256::new_from_slice(key).expect("hmac accepts any key length");
    for p in parts {
        m.update(p);
    }
    m.verify_slice(tag).is_ok()
}

/// Sign/verify contract; swap the implementation to change the cipher.
pub trait PacketSigner: Send + Sync {
    fn key_locator(&self) -> &Name;
    fn sign_bytes(&self, bytes: &[u8]) -> Vec<u8>;
}

pub trait PacketVerifier: Send + Sync {
    fn verify_bytes(&self, bytes: &[u8], sig: &SignatureBlock) -> bool;
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub key_locator: Name,
    pub key: KeyBytes,
    pub anchor_signature: Vec<u8>,
}

impl Certificate {
    fn signed_bytes(key_locator: &Name, key: &KeyBytes) -> Vec<u8> {
        let mut v = key_locator.to_string().into_bytes();
        v.push(0);
        v.extend_from_slice(key);
        v
    }
}

/// The federation's trust anchor (the provider's self-signed certificate).
#[derive(Debug, Clone)]
pub struct TrustAnchor {
    key: KeyBytes,
}

impl TrustAnchor {
    pub fn new(key: KeyBytes) -> Self {
        Self { key }
    }

    pub fn issue(&self, key_locator: Name, key: KeyBytes) -> Certificate {
        let anchor_signature = mac(&self.key, &[&Certificate::signed_bytes(&key_locator, &key)]);
        Certificate {
            key_locator,
            key,
            anchor_signature,
        }
    }

    pub fn validates(&self, cert: &Certificate) -> bool {
        mac_ok(
            &self.key,
            &[&Certificate::signed_bytes(&cert.key_locator, &cert.key)],
            &cert.anchor_signature,
        )
    }
}

#[derive(Debug, Clone)]
pub struct HmacSigner {
    key_locator: Name,
    key: KeyBytes,
}

impl HmacSigner {
    pub fn new(key_locator: Name, key: KeyBytes) -> Self {
        Self { key_locator, key }
    }
}

impl PacketSigner for HmacSigner {
    fn key_locator(&self) -> &Name {
        &self.key_locator
    }

    fn sign_bytes(&self, bytes: &[u8]) -> Vec<u8> {
        mac(&self.key, &[bytes])
    }
}

/// Verification keys admitted by the trust anchor, by key locator.
#[derive(Debug, Clone)]
pub struct KeyRegistry {
    anchor: TrustAnchor,
    keys: FxHashMap<Name, KeyBytes>,
}

impl KeyRegistry {
    pub fn new(anchor: TrustAnchor) -> Self {
        Self {
            anchor,
            keys: FxHashMap::default(),
        }
    }

    pub fn register(&mut self, cert: &Certificate) -> Result<(), SecurityError> {
        if !self.anchor.validates(cert) {
            return Err(SecurityError::BadCertificate(cert.key_locator.to_string()));
        }
        self.keys.insert(cert.key_locator.clone(), cert.key);
        Ok(())
    }

    pub fn anchor(&self) -> &TrustAnchor {
        &self.anchor
    }

    pub fn knows(&self, key_locator: &Name) -> bool {
        self.keys.contains_key(key_locator)
    }
}

impl PacketVerifier for KeyRegistry {
    fn verify_bytes(&self, bytes: &[u8], sig: &SignatureBlock) -> bool {
        match self.keys.get(&sig.key_locator) {
            Some(key) => mac_ok(key, &[bytes], &sig.value),
            None => false,
        }
    }
}

pub fn sign_data(name: Name, payload: Vec<u8>, freshness_ms: u64, signer: &dyn PacketSigner) -> Data {
    let key_locator = signer.key_locator().clone();
    let value = signer.sign_bytes(&Data::signed_portion(&name, &payload, freshness_ms, &key_locator));
    Data {
        name,
        payload,
        freshness_ms,
        signature: SignatureBlock { key_locator, value },
    }
}

pub fn sign_interest(name: Name, nonce: u64, signer: &dyn PacketSigner) -> Interest {
    let key_locator = signer.key_locator().clone();
    let value = signer.sign_bytes(&Interest::signed_portion(&name, &key_locator));
    Interest {
        name,
        nonce,
        signature: Some(SignatureBlock { key_locator, value }),
    }
}

pub fn verify_data(d: &Data, verifier: &dyn PacketVerifier) -> bool {
    verifier.verify_bytes(&d.current_signed_portion(), &d.signature)
}

/// Unsigned Interests never verify.
pub fn verify_interest(i: &Interest, verifier: &dyn PacketVerifier) -> bool {
    match &i.signature {
        Some(sig) => verifier.verify_bytes(&Interest::signed_portion(&i.name, &sig.key_locator), sig),
        None => false,
    }
}
