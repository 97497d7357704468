//! Object store backends: in-memory for tests and sweeps, one-file-per-object
//! on disk for inspection.

mod fs;
mod mem;

use std::path::PathBuf;
use std::sync::Arc;

pub use faasmr_core::store::{ObjectKey, ObjectStore, StoreError};
pub use fs::FsStore;
pub use mem::{MemStore, ObjectRecord};

/// Shared store handle passed to every invocation.
pub type SharedStore = Arc<dyn ObjectStore>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StoreKind {
    Mem,
    Fs(PathBuf),
}

impl StoreKind {
    pub fn open(&self) -> Result<SharedStore, StoreError> {
        Ok(match self {
            StoreKind::Mem => Arc::new(MemStore::new()),
            StoreKind::Fs(root) => Arc::new(FsStore::open(root)?),
        })
    }
}
