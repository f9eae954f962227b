//! Content-addressed JSON cache: one document per key, filename = hex
//! digest of the key material. Inspectable and diff-able; no database.
//!
//! Namespaces map to subdirectories (`parse/`, `osm/`, `wikidata/`) so the
//! same cache directory serves the parser and both remote backends.
//! Concurrent readers are safe; concurrent writers of the same key race
//! benignly because a key's value is deterministic (last write wins;
//! writes go through a temp file + rename).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache io: {0}")]
    Io(#[from] std::io::Error),
    #[error("cache entry is not valid JSON: {0}")]
    Corrupt(#[from] serde_json::Error),
}

/// Stable hex digest over an ordered list of key parts. Parts are length-
/// prefixed so ("ab","c") and ("a","bc") cannot collide.
pub fn digest(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        hasher.update((part.len() as u64).to_be_bytes());
        hasher.update(part.as_bytes());
    }
    hex::encode(hasher.finalize())
}

#[derive(Debug, Clone)]
pub struct JsonCache {
    root: PathBuf,
}

impl JsonCache {
    pub fn new(root: impl Into<PathBuf>) -> JsonCache {
        JsonCache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn path(&self, namespace: &str, key: &str) -> PathBuf {
        self.root.join(namespace).join(format!("{key}.json"))
    }

    pub fn get<T: DeserializeOwned>(
        &self,
        namespace: &str,
        key: &str,
    ) -> Result<Option<T>, CacheError> {
        let path = self.path(namespace, key);
        match fs::read(&path) {
            Ok(bytes) => Ok(Some(serde_json::from_slice(&bytes)?)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(e.into()),
        }
    }

    pub fn put<T: Serialize>(
        &self,
        namespace: &str,
        key: &str,
        value: &T,
    ) -> Result<(), CacheError> {
        let path = self.path(namespace, key);
        let dir = path.parent().expect("cache path has a parent");
        fs::create_dir_all(dir)?;
        let mut tmp = tempfile_in(dir)?;
        serde_json::to_writer_pretty(&mut tmp.1, value)?;
        tmp.1.flush()?;
        fs::rename(&tmp.0, &path)?;
        Ok(())
    }

    /// Keys present in a namespace, sorted.
    pub fn keys(&self, namespace: &str) -> Result<Vec<String>, CacheError> {
        let dir = self.root.join(namespace);
        let mut out = Vec::new();
        let entries = match fs::read_dir(&dir) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(e.into()),
        };
        for entry in entries {
            let name = entry?.file_name();
            if let Some(stem) = name.to_string_lossy().strip_suffix(".json") {
                out.push(stem.to_string());
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn namespaces(&self) -> Result<Vec<String>, CacheError> {
        let mut out = Vec::new();
        let entries = match fs::read_dir(&self.root) {
            Ok(e) => e,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(out),
            Err(e) => return Err(e.into()),
        };
        for entry in entries {
            let entry = entry?;
            if entry.file_type()?.is_dir() {
                out.push(entry.file_name().to_string_lossy().into_owned());
            }
        }
        out.sort();
        Ok(out)
    }

    /// Remove every entry in every namespace.
    pub fn clear(&self) -> Result<usize, CacheError> {
        let mut removed = 0;
        for ns in self.namespaces()? {
            for key in self.keys(&ns)? {
                fs::remove_file(self.path(&ns, &key))?;
                removed += 1;
            }
        }
        Ok(removed)
    }
}

/// Unique temp file in `dir` for atomic writes; avoids clobbering a
/// concurrent writer's partial output.
fn tempfile_in(dir: &Path) -> Result<(PathBuf, fs::File), std::io::Error> {
    use std::sync::atomic::{AtomicU64, Ordering};
    static COUNTER: AtomicU64 = AtomicU64::new(0);
    let unique = format!(
        ".tmp-{}-{}",
        std::process::id(),
        COUNTER.fetch_add(1, Ordering::Relaxed)
    );
    let path = dir.join(unique);
    let file = fs::OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(&path)?;
    Ok((path, file))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_is_stable_and_injective_on_parts() {
        assert_eq!(digest(&["a", "b"]), digest(&["a", "b"]));
        assert_ne!(digest(&["ab", ""]), digest(&["a", "b"]));
        assert_ne!(digest(&["a"]), digest(&["b"]));
        assert_eq!(digest(&["x"]).len(), 64);
    }

    #[test]
    fn round_trip_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = JsonCache::new(dir.path());
        let key = digest(&["lahore", "pakistan"]);
        assert_eq!(
            cache.get::<serde_json::Value>("parse", &key).unwrap(),
            None
        );
        let value = serde_json::json!({"Admin1": ["Punjab"]});
        cache.put("parse", &key, &value).unwrap();
        assert_eq!(
            cache.get::<serde_json::Value>("parse", &key).unwrap(),
            Some(value)
        );
    }

    #[test]
    fn keys_and_clear() {
        let dir = tempfile::tempdir().unwrap();
        let cache = JsonCache::new(dir.path());
        cache.put("osm", "k1", &1u32).unwrap();
        cache.put("osm", "k2", &2u32).unwrap();
        cache.put("wikidata", "k3", &3u32).unwrap();
        assert_eq!(cache.keys("osm").unwrap(), vec!["k1", "k2"]);
        assert_eq!(cache.namespaces().unwrap(), vec!["osm", "wikidata"]);
        assert_eq!(cache.clear().unwrap(), 3);
        assert!(cache.keys("osm").unwrap().is_empty());
    }

    #[test]
    fn concurrent_writers_of_distinct_keys() {
        let dir = tempfile::tempdir().unwrap();
        let cache = std::sync::Arc::new(JsonCache::new(dir.path()));
        let mut handles = Vec::new();
        for i in 0..8 {
            let cache = cache.clone();
            handles.push(std::thread::spawn(move || {
                for j in 0..20 {
                    let key = digest(&[&format!("{i}-{j}")]);
                    cache.put("parse", &key, &(i * 100 + j)).unwrap();
                    let back: Option<i32> = cache.get("parse", &key).unwrap();
                    assert_eq!(back, Some(i * 100 + j));
                }
            }));
        }
        for h in handles {
            h.join().unwrap();
        }
        assert_eq!(cache.keys("parse").unwrap().len(), 160);
    }
}
