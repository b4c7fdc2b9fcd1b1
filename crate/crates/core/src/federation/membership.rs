use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};

use crate::icn::{Certificate, HmacSigner, KeyRegistry, PacketVerifier, SignatureBlock, TrustAnchor};
use crate::name::Name;

use super::FederationError;

/// Key registry shared by every node of one federation, so a join becomes
/// visible to all verifiers at once.
#[derive(Debug, Clone)]
pub struct SharedRegistry(Arc<RwLock<KeyRegistry>>);

impl SharedRegistry {
    pub fn new(anchor: TrustAnchor) -> Self {
        Self(Arc::new(RwLock::new(KeyRegistry::new(anchor))))
    }

    pub fn knows(&self, key_locator: &Name) -> bool {
        self.0.read().expect("registry lock").knows(key_locator)
    }
}

impl PacketVerifier for SharedRegistry {
    fn verify_bytes(&self, bytes: &[u8], sig: &SignatureBlock) -> bool {
        self.0.read().expect("registry lock").verify_bytes(bytes, sig)
    }
}

/// A site's credentials: its signer and the certificate for its key.
#[derive(Debug, Clone)]
pub struct SiteIdentity {
    pub dbsid: String,
    pub signer: HmacSigner,
    pub certificate: Certificate,
}

impl SiteIdentity {
    pub fn key_locator(dbsid: &str) -> Name {
        Name::from_components([dbsid, "KEY"]).expect("dbsid is a valid component")
    }

    /// Identity whose certificate is issued by `anchor`.
    pub fn issue(anchor: &TrustAnchor, dbsid: &str, key: [u8; 32]) -> Self {
        let loc = Self::key_locator(dbsid);
        Self {
            dbsid: dbsid.to_string(),
            signer: HmacSigner::new(loc.clone(), key),
            certificate: anchor.issue(loc, key),
        }
    }
}

/// Admission control of the federation provider.
#[derive(Debug, Clone)]
pub struct Membership {
    registry: SharedRegistry,
    members: BTreeMap<String, Certificate>,
}

impl Membership {
    pub fn new(anchor: TrustAnchor) -> Self {
        Self {
            registry: SharedRegistry::new(anchor),
            members: BTreeMap::new(),
        }
    }

    pub fn registry(&self) -> &SharedRegistry {
        &self.registry
    }

    pub fn members(&self) -> impl Iterator<Item = &str> {
        self.members.keys().map(String::as_str)
    }

    pub fn is_member(&self, dbsid: &str) -> bool {
        self.members.contains_key(dbsid)
    }

    /// Validate and register a site's certificate. Returns `true` for a new
    /// member and `false` for a re-join of a known one.
    pub fn admit(&mut self, dbsid: &str, cert: &Certificate) -> Result<bool, FederationError> {
        if cert.key_locator != SiteIdentity::key_locator(dbsid) {
            return Err(FederationError::ForeignKey(cert.key_locator.to_string(), dbsid.to_string()));
        }
        self.registry
            .0
            .write()
            .expect("registry lock")
            .register(cert)
            .map_err(|_| FederationError::BadCertificate(dbsid.to_string()))?;
        Ok(self.members.insert(dbsid.to_string(), cert.clone()).is_none())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn admission() {
        let anchor = TrustAnchor::new([7; 32]);
        let mut m = Membership::new(anchor.clone());
        let a = SiteIdentity::issue(&anchor, "dbs#1", [1; 32]);
        assert_eq!(m.admit("dbs#1", &a.certificate), Ok(true));
        assert_eq!(m.admit("dbs#1", &a.certificate), Ok(false));
        let rogue = SiteIdentity::issue(&TrustAnchor::new([8; 32]), "dbs#2", [2; 32]);
        assert!(matches!(m.admit("dbs#2", &rogue.certificate), Err(FederationError::BadCertificate(_))));
        assert!(!m.is_member("dbs#2"));
        assert!(!m.registry().knows(&SiteIdentity::key_locator("dbs#2")));
        assert!(matches!(m.admit("dbs#3", &a.certificate), Err(FederationError::ForeignKey(..))));
        assert_eq!(m.members().collect::<Vec<_>>(), vec!["dbs#1"]);
    }
}
