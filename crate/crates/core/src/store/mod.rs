//! In-memory spatial database engine with versioned object names, a local
//! grid index, and statement adapters for two DBMS dialects.

mod engine;
pub mod ingest;
mod object;
mod statement;

use thiserror::Error;

pub use engine::SpatialStore;
pub use object::{Geometry, SpatialObject};
pub use statement::{parse_dialect, translate, Dialect, QueryStatement};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StoreError {
    #[error("object {0} already exists")]
    AlreadyExists(String),
    #[error("object {0} not found")]
    NotFound(String),
    #[error("invalid key: {0}")]
    InvalidKey(String),
    #[error("malformed statement: {0}")]
    Statement(String),
    #[error("decode error: {0}")]
    Decode(String),
}
