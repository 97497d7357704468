//! Object keys and the storage interface shared by every backend.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

/// Longest accepted bucket name.
pub const MAX_BUCKET_LEN: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StoreError {
    #[error("invalid object key: {0}")]
    InvalidKey(String),
    #[error("object not found: {0}")]
    NotFound(ObjectKey),
    #[error("storage full while writing {0}")]
    StorageFull(ObjectKey),
    #[error("storage backend error: {0}")]
    Backend(String),
}

/// `(bucket, key)` address of one object.
///
/// Buckets are `[a-z0-9-]{1,63}`. Keys are slash-separated paths over
/// `[A-Za-z0-9._-]` with no leading or trailing slash, no empty segment and no
/// `.`/`..` segment, so a key maps onto a filesystem path without escaping.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawKey", into = "RawKey")]
pub struct ObjectKey {
    bucket: String,
    key: String,
}

#[derive(Serialize, Deserialize)]
struct RawKey {
    bucket: String,
    key: String,
}

impl TryFrom<RawKey> for ObjectKey {
    type Error = StoreError;

    fn try_from(raw: RawKey) -> Result<Self, Self::Error> {
        ObjectKey::new(raw.bucket, raw.key)
    }
}

impl From<ObjectKey> for RawKey {
    fn from(k: ObjectKey) -> Self {
        RawKey {
            bucket: k.bucket,
            key: k.key,
        }
    }
}

impl ObjectKey {
    pub fn new(bucket: impl Into<String>, key: impl Into<String>) -> Result<Self, StoreError> {
        let bucket = bucket.into();
        let key = key.into();
        validate_bucket(&bucket)?;
        validate_key(&key)?;
        Ok(Self { bucket, key })
    }

    pub fn bucket(&self) -> &str {
        &self.bucket
    }

    pub fn key(&self) -> &str {
        &self.key
    }
}

impl fmt::Display for ObjectKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.bucket, self.key)
    }
}

impl fmt::Debug for ObjectKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ObjectKey({}/{})", self.bucket, self.key)
    }
}

pub fn validate_bucket(bucket: &str) -> Result<(), StoreError> {
    if bucket.is_empty() || bucket.len() > MAX_BUCKET_LEN {
        return Err(StoreError::InvalidKey(alloc::format!(
            "bucket name must be 1..={MAX_BUCKET_LEN} bytes"
        )));
    }
    if !bucket
        .bytes()
        .all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'-')
    {
        return Err(StoreError::InvalidKey(alloc::format!(
            "bucket {bucket:?} may only contain a-z, 0-9 and '-'"
        )));
    }
    Ok(())
}

fn is_key_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || matches!(b, b'/' | b'-' | b'_' | b'.')
}

pub fn validate_key(key: &str) -> Result<(), StoreError> {
    if key.is_empty() {
        return Err(StoreError::InvalidKey("key must not be empty".to_string()));
    }
    if let Some(b) = key.bytes().find(|&b| !is_key_byte(b)) {
        return Err(StoreError::InvalidKey(alloc::format!(
            "key {key:?} contains disallowed byte 0x{b:02x}"
        )));
    }
    for segment in key.split('/') {
        if segment.is_empty() || segment == "." || segment == ".." {
            return Err(StoreError::InvalidKey(alloc::format!(
                "key {key:?} has an empty, '.' or '..' path segment"
            )));
        }
    }
    Ok(())
}

/// Blob storage shared by concurrently running functions.
///
/// Implementations must be linearizable per key: a `get` returns the bytes of
/// exactly one completed `put`, never a mix of two.
pub trait ObjectStore: Send + Sync {
    /// Stores `data` under `key`, atomically replacing any previous object.
    fn put(&self, key: &ObjectKey, data: Vec<u8>) -> Result<(), StoreError>;

    fn get(&self, key: &ObjectKey) -> Result<Vec<u8>, StoreError>;

    /// Keys in `bucket` starting with `prefix`, in byte-wise ascending order.
    fn list(&self, bucket: &str, prefix: &str) -> Result<Vec<ObjectKey>, StoreError>;

    /// Removes every key in `bucket` starting with `prefix`; returns how many were removed.
    fn delete_prefix(&self, bucket: &str, prefix: &str) -> Result<usize, StoreError>;
}
