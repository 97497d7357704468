use std::collections::BTreeMap;
use std::sync::{Arc, RwLock};
use std::time::Instant;

use faasmr_core::store::{ObjectKey, ObjectStore, StoreError};

/// One immutable stored blob.
#[derive(Debug)]
pub struct ObjectRecord {
    pub key: ObjectKey,
    pub data: Vec<u8>,
    pub created_at: Instant,
}

impl ObjectRecord {
    pub fn size(&self) -> usize {
        self.data.len()
    }
}

/// In-memory store. Overwrites swap a whole `Arc<ObjectRecord>`, so readers
/// see either the old or the new blob.
#[derive(Debug, Default)]
pub struct MemStore {
    objects: RwLock<BTreeMap<ObjectKey, Arc<ObjectRecord>>>,
}

impl MemStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&self, key: &ObjectKey) -> Result<Arc<ObjectRecord>, StoreError> {
        self.objects
            .read()
            .expect("store lock poisoned")
            .get(key)
            .cloned()
            .ok_or_else(|| StoreError::NotFound(key.clone()))
    }

    pub fn len(&self) -> usize {
        self.objects.read().expect("store lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl ObjectStore for MemStore {
    fn put(&self, key: &ObjectKey, data: Vec<u8>) -> Result<(), StoreError> {
        let record = Arc::new(ObjectRecord {
            key: key.clone(),
            data,
            created_at: Instant::now(),
        });
        self.objects
            .write()
            .expect("store lock poisoned")
            .insert(key.clone(), record);
        Ok(())
    }

    fn get(&self, key: &ObjectKey) -> Result<Vec<u8>, StoreError> {
        let record = self.record(key)?;
        Ok(record.data.clone())
    }

    fn list(&self, bucket: &str, prefix: &str) -> Result<Vec<ObjectKey>, StoreError> {
        let objects = self.objects.read().expect("store lock poisoned");
        Ok(objects
            .keys()
            .filter(|k| k.bucket() == bucket && k.key().starts_with(prefix))
            .cloned()
            .collect())
    }

    fn delete_prefix(&self, bucket: &str, prefix: &str) -> Result<usize, StoreError> {
        let mut objects = self.objects.write().expect("store lock poisoned");
        let before = objects.len();
        objects.retain(|k, _| !(k.bucket() == bucket && k.key().starts_with(prefix)));
        Ok(before - objects.len())
    }
}
