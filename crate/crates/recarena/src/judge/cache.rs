//! File-backed response cache: one file per cache key, inspectable and
//! crash-safe.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Directory of cached raw provider responses, sharded by the first two
/// hex digits of the key: `{dir}/{key[0..2]}/{key}.json`.
#[derive(Debug, Clone)]
pub struct ResponseCache {
    dir: PathBuf,
}

impl ResponseCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ResponseCache { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path_for(&self, key: &str) -> Result<PathBuf> {
        if key.len() < 2 || !key.chars().all(|c| c.is_ascii_hexdigit()) {
            return Err(Error::Cache(format!("malformed cache key {key:?}")));
        }
        Ok(self.dir.join(&key[..2]).join(format!("{key}.json")))
    }

    pub fn get(&self, key: &str) -> Result<Option<String>> {
        let path = self.path_for(key)?;
        match fs::read_to_string(&path) {
            Ok(text) => Ok(Some(text)),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(Error::io(path, e)),
        }
    }

    /// Store a value with write-to-temp-then-rename semantics so
    /// concurrent writers and crashes never leave a torn entry.
    pub fn put(&self, key: &str, value: &str) -> Result<()> {
        let path = self.path_for(key)?;
        let parent = path.parent().expect("cache path has a shard directory");
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        let tmp = parent.join(format!(
            ".{}.tmp.{}",
            path.file_name().and_then(|n| n.to_str()).unwrap_or("entry"),
            std::process::id()
        ));
        fs::write(&tmp, value).map_err(|e| Error::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))
    }
}
