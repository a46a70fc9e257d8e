//! Content-addressed completion cache.
//!
//! Layout, stable across versions: `<dir>/<first two key hex chars>/<key>.json`,
//! one JSON record per entry holding the key, the originating request, and
//! the completion. Writes go through a temp file plus rename so concurrent
//! writers never expose a torn entry.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{Completion, CompletionRequest, GatewayError, Usage};

#[derive(Debug, Serialize, Deserialize)]
struct CacheRecord {
    key: String,
    request: CompletionRequest,
    text: String,
    usage: Usage,
    backend: String,
}

#[derive(Debug, Clone)]
pub struct DiskCache {
    dir: PathBuf,
}

impl DiskCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn entry_path(&self, key: &str) -> PathBuf {
        let shard = key.get(0..2).unwrap_or("xx");
        self.dir.join(shard).join(format!("{key}.json"))
    }

    fn err(path: &Path, reason: impl ToString) -> GatewayError {
        GatewayError::Cache {
            path: path.to_path_buf(),
            reason: reason.to_string(),
        }
    }

    pub fn get(&self, key: &str) -> Result<Option<Completion>, GatewayError> {
        let path = self.entry_path(key);
        let text = match fs::read_to_string(&path) {
            Ok(text) => text,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(Self::err(&path, e)),
        };
        let record: CacheRecord = serde_json::from_str(&text).map_err(|e| Self::err(&path, e))?;
        Ok(Some(Completion {
            text: record.text,
            usage: record.usage,
            backend: record.backend,
            cached: true,
        }))
    }

    pub fn put(
        &self,
        key: &str,
        request: &CompletionRequest,
        completion: &Completion,
    ) -> Result<(), GatewayError> {
        let path = self.entry_path(key);
        let parent = path.parent().expect("entry path has a parent");
        fs::create_dir_all(parent).map_err(|e| Self::err(parent, e))?;
        let record = CacheRecord {
            key: key.to_string(),
            request: request.clone(),
            text: completion.text.clone(),
            usage: completion.usage,
            backend: completion.backend.clone(),
        };
        let json = serde_json::to_vec_pretty(&record).map_err(|e| Self::err(&path, e))?;
        let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
        fs::write(&tmp, &json).map_err(|e| Self::err(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Self::err(&path, e))?;
        Ok(())
    }

    /// Deletes every cache entry. Only files matching the cache layout are
    /// touched; anything else in the directory is left alone.
    pub fn purge(&self) -> Result<usize, GatewayError> {
        let mut removed = 0;
        if !self.dir.exists() {
            return Ok(0);
        }
        let shards = fs::read_dir(&self.dir).map_err(|e| Self::err(&self.dir, e))?;
        for shard in shards {
            let shard = shard.map_err(|e| Self::err(&self.dir, e))?.path();
            if !shard.is_dir() || shard.file_name().is_none_or(|n| n.len() != 2) {
                continue;
            }
            let entries = fs::read_dir(&shard).map_err(|e| Self::err(&shard, e))?;
            for entry in entries {
                let path = entry.map_err(|e| Self::err(&shard, e))?.path();
                if path.extension().and_then(|e| e.to_str()) == Some("json") {
                    fs::remove_file(&path).map_err(|e| Self::err(&path, e))?;
                    removed += 1;
                }
            }
            // Remove the shard directory if it is now empty.
            let _ = fs::remove_dir(&shard);
        }
        Ok(removed)
    }
}
