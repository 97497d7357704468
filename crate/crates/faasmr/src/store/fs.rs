use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use faasmr_core::store::{validate_bucket, ObjectKey, ObjectStore, StoreError};
use tempfile::NamedTempFile;
use walkdir::WalkDir;

/// Staging directory for in-flight writes. The leading dot keeps it out of
/// the bucket namespace.
const STAGING_DIR: &str = ".staging";

/// One file per object at `<root>/<bucket>/<key>`, bytes stored verbatim.
///
/// Writes go to a temp file under `<root>/.staging` and are renamed into
/// place, so readers never observe a partially written object.
#[derive(Debug, Clone)]
pub struct FsStore {
    root: PathBuf,
}

fn backend(context: &str, err: io::Error) -> StoreError {
    StoreError::Backend(format!("{context}: {err}"))
}

impl FsStore {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        fs::create_dir_all(root.join(STAGING_DIR))
            .map_err(|e| backend(&format!("creating {}", root.display()), e))?;
        Ok(Self { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_of(&self, key: &ObjectKey) -> PathBuf {
        let mut path = self.root.join(key.bucket());
        path.extend(key.key().split('/'));
        path
    }

    fn write_error(key: &ObjectKey, err: io::Error) -> StoreError {
        if err.kind() == io::ErrorKind::StorageFull {
            StoreError::StorageFull(key.clone())
        } else {
            backend(&format!("writing {key}"), err)
        }
    }

    fn walk_bucket(
        &self,
        bucket: &str,
        prefix: &str,
    ) -> Result<Vec<(ObjectKey, PathBuf)>, StoreError> {
        if validate_bucket(bucket).is_err() {
            return Ok(Vec::new());
        }
        let base = self.root.join(bucket);
        if !base.is_dir() {
            return Ok(Vec::new());
        }
        let mut found = Vec::new();
        for entry in WalkDir::new(&base).min_depth(1) {
            let entry = entry.map_err(|e| StoreError::Backend(format!("listing {bucket}: {e}")))?;
            if !entry.file_type().is_file() {
                continue;
            }
            let rel = entry
                .path()
                .strip_prefix(&base)
                .expect("walkdir yields paths under base");
            let Some(key) = rel
                .iter()
                .map(|c| c.to_str())
                .collect::<Option<Vec<_>>>()
                .map(|parts| parts.join("/"))
            else {
                continue;
            };
            if !key.starts_with(prefix) {
                continue;
            }
            // foreign files that are not valid keys are ignored
            if let Ok(k) = ObjectKey::new(bucket, key) {
                found.push((k, entry.into_path()));
            }
        }
        found.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(found)
    }
}

impl ObjectStore for FsStore {
    fn put(&self, key: &ObjectKey, data: Vec<u8>) -> Result<(), StoreError> {
        let target = self.path_of(key);
        if let Some(parent) = target.parent() {
            fs::create_dir_all(parent).map_err(|e| Self::write_error(key, e))?;
        }
        let mut tmp = NamedTempFile::new_in(self.root.join(STAGING_DIR))
            .map_err(|e| Self::write_error(key, e))?;
        tmp.write_all(&data)
            .map_err(|e| Self::write_error(key, e))?;
        tmp.persist(&target)
            .map_err(|e| Self::write_error(key, e.error))?;
        Ok(())
    }

    fn get(&self, key: &ObjectKey) -> Result<Vec<u8>, StoreError> {
        let path = self.path_of(key);
        match fs::read(&path) {
            Ok(data) => Ok(data),
            // a directory where the key would be (e.g. "a" when "a/b" exists) is not an object
            Err(e) if e.kind() == io::ErrorKind::NotFound || path.is_dir() => {
                Err(StoreError::NotFound(key.clone()))
            }
            Err(e) => Err(backend(&format!("reading {key}"), e)),
        }
    }

    fn list(&self, bucket: &str, prefix: &str) -> Result<Vec<ObjectKey>, StoreError> {
        Ok(self
            .walk_bucket(bucket, prefix)?
            .into_iter()
            .map(|(k, _)| k)
            .collect())
    }

    fn delete_prefix(&self, bucket: &str, prefix: &str) -> Result<usize, StoreError> {
        let victims = self.walk_bucket(bucket, prefix)?;
        let mut removed = 0;
        for (key, path) in &victims {
            match fs::remove_file(path) {
                Ok(()) => removed += 1,
                Err(e) if e.kind() == io::ErrorKind::NotFound => {}
                Err(e) => return Err(backend(&format!("deleting {key}"), e)),
            }
            prune_empty_dirs(path.parent(), &self.root.join(bucket));
        }
        Ok(removed)
    }
}

fn prune_empty_dirs(mut dir: Option<&Path>, stop: &Path) {
    while let Some(d) = dir {
        if d == stop || !d.starts_with(stop) || fs::remove_dir(d).is_err() {
            break;
        }
        dir = d.parent();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(k: &str) -> ObjectKey {
        ObjectKey::new("jobs", k).unwrap()
    }

    #[test]
    fn staging_is_empty_after_writes() {
        let dir = tempfile::tempdir().unwrap();
        let store = FsStore::open(dir.path()).unwrap();
        store.put(&key("a/b"), b"x".to_vec()).unwrap();
        assert_eq!(
            fs::read_dir(dir.path().join(STAGING_DIR)).unwrap().count(),
            0
        );
        assert!(store.list(STAGING_DIR, "").unwrap().is_empty());
    }

    #[test]
    fn foreign_files_are_not_listed() {
        let dir = tempfile::tempdir().unwrap();
        let store = FsStore::open(dir.path()).unwrap();
        store.put(&key("j/ok.txt"), b"x".to_vec()).unwrap();
        fs::write(dir.path().join("jobs/j/not a key"), b"y").unwrap();
        assert_eq!(store.list("jobs", "").unwrap(), vec![key("j/ok.txt")]);
    }

    #[test]
    fn delete_prunes_empty_directories() {
        let dir = tempfile::tempdir().unwrap();
        let store = FsStore::open(dir.path()).unwrap();
        store.put(&key("j/int/m0/p0.tsv"), b"x".to_vec()).unwrap();
        store.put(&key("j/out/part-0.tsv"), b"x".to_vec()).unwrap();
        assert_eq!(store.delete_prefix("jobs", "j/int/").unwrap(), 1);
        assert!(!dir.path().join("jobs/j/int").exists());
        assert!(dir.path().join("jobs/j/out").is_dir());
    }
}
