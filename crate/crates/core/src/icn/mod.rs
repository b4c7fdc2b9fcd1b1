//! ICN forwarding engine: packets, faces, FIB/PIT/content store, and
//! data-centric signatures.

mod forwarder;
pub mod packet;
pub mod security;
mod tables;

pub use forwarder::{Forwarder, ForwarderConfig, ForwarderStats, Send};
pub use packet::{Data, Interest, Packet, SignatureBlock, DEFAULT_MAX_PAYLOAD};
pub use security::{
    sign_data, sign_interest, verify_data, verify_interest, Certificate, HmacSigner, KeyRegistry, PacketSigner,
    PacketVerifier, SecurityError, TrustAnchor,
};
pub use tables::{ContentStore, Fib, FibEntry, Pit, PitEntry, PitInsert};

/// Face identifier, local to one node.
pub type FaceId = u32;

/// Simulated time in microseconds.
pub type Time = u64;
