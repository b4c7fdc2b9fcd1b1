//! Global indexing: active tiles, constrained tessellation, the merged
//! index used for query routing, and its synchronization protocol.

pub mod codec;
mod global;
pub mod names;
mod sync;
mod tessellation;

use thiserror::Error;

pub use global::{GlobalIndexStore, Tessellation, INDEX_DID};
pub use sync::{IndexSync, SyncConfig, SyncStats};
pub use tessellation::{compute_smin, tessellate, CostModel, TileTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("malformed index data: {0}")]
    Malformed(String),
}
