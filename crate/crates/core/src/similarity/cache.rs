//! Content-addressed cache of provider results.
//!
//! Keys are SHA-256 digests of `(kind, model id, text)` for embeddings and
//! `(kind, model id, premise, hypothesis)` for entailment scores. Entries
//! live in memory and, when a directory is configured, as one JSON blob per
//! key at `<dir>/<first two hex digits>/<digest>.json`.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "UQ_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CacheValue {
    Embedding { embedding: Vec<f64> },
    Entailment { entail_prob: f64 },
}

#[derive(Debug, Default)]
pub struct SimilarityCache {
    dir: Option<PathBuf>,
    memory: RwLock<HashMap<String, CacheValue>>,
    write_lock: Mutex<()>,
}

pub fn embedding_key(model_id: &str, text: &str) -> String {
    digest(&["embed", model_id, text])
}

pub fn entailment_key(model_id: &str, premise: &str, hypothesis: &str) -> String {
    digest(&["nli", model_id, premise, hypothesis])
}

fn digest(parts: &[&str]) -> String {
    let mut hasher = Sha256::new();
    for part in parts {
        // Length prefix keeps ("ab","c") and ("a","bc") apart.
        hasher.update((part.len() as u64).to_le_bytes());
        hasher.update(part.as_bytes());
    }
    hex::encode(hasher.finalize())
}

impl SimilarityCache {
    /// Memory-only cache.
    pub fn in_memory() -> Self {
        Self::default()
    }

    pub fn with_dir(dir: impl Into<PathBuf>) -> Self {
        Self { dir: Some(dir.into()), ..Self::default() }
    }

    /// Directory from `UQ_CACHE_DIR`, else `fallback`.
    pub fn from_env_or(fallback: impl Into<PathBuf>) -> Self {
        match std::env::var_os(CACHE_DIR_ENV) {
            Some(dir) if !dir.is_empty() => Self::with_dir(PathBuf::from(dir)),
            _ => Self::with_dir(fallback),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn blob_path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(&key[..2]).join(format!("{key}.json")))
    }

    pub fn get(&self, key: &str) -> Option<CacheValue> {
        if let Some(v) = self.memory.read().expect("cache lock poisoned").get(key) {
            return Some(v.clone());
        }
        let path = self.blob_path(key)?;
        let bytes = fs::read(&path).ok()?;
        match serde_json::from_slice::<CacheValue>(&bytes) {
            Ok(value) => {
                self.memory.write().expect("cache lock poisoned").insert(key.to_string(), value.clone());
                Some(value)
            }
            Err(e) => {
                log::warn!("ignoring corrupt cache blob {}: {e}", path.display());
                None
            }
        }
    }

    pub fn get_embedding(&self, key: &str) -> Option<Vec<f64>> {
        match self.get(key)? {
            CacheValue::Embedding { embedding } => Some(embedding),
            CacheValue::Entailment { .. } => None,
        }
    }

    pub fn get_entailment(&self, key: &str) -> Option<f64> {
        match self.get(key)? {
            CacheValue::Entailment { entail_prob } => Some(entail_prob),
            CacheValue::Embedding { .. } => None,
        }
    }

    /// Stores in memory and persists to disk. Disk failures are logged and
    /// leave the in-memory entry in place.
    pub fn put(&self, key: String, value: CacheValue) {
        if let Some(path) = self.blob_path(&key) {
            let _guard = self.write_lock.lock().expect("cache lock poisoned");
            if let Err(e) = write_atomic(&path, &value) {
                log::warn!("cannot persist cache blob {}: {e}", path.display());
            }
        }
        self.memory.write().expect("cache lock poisoned").insert(key, value);
    }

    pub fn len(&self) -> usize {
        self.memory.read().expect("cache lock poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn write_atomic(path: &Path, value: &CacheValue) -> std::io::Result<()> {
    let parent = path.parent().expect("blob path has a parent");
    fs::create_dir_all(parent)?;
    let tmp = path.with_extension("json.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(&serde_json::to_vec(value)?)?;
    }
    fs::rename(tmp, path)
}
