//! Content-addressed on-disk cache of computed series.
//!
//! Layout: `<root>/v<VERSION>/<key[..2]>/<key>.json`, where `key` is the
//! SHA-256 of the canonical parameter string. Entries are written to a
//! temporary file in the same directory and renamed into place.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use bps_core::series::QSeries;

use crate::wire::{series_from_wire, series_to_wire, SeriesWire};

pub const CACHE_VERSION: u32 = 1;

/// Environment variable naming the cache root when `--cache-dir` is absent.
pub const CACHE_ENV: &str = "BPS_CACHE_DIR";

#[derive(Serialize, Deserialize)]
struct Entry {
    version: u32,
    key: String,
    series: SeriesWire,
}

#[derive(Clone, Debug)]
pub struct Cache {
    root: PathBuf,
}

impl Cache {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Cache { root: root.into() }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Hash of the parts joined by a separator that cannot occur in them.
    pub fn key(parts: &[&str]) -> String {
        let mut h = Sha256::new();
        h.update(format!("v{CACHE_VERSION}"));
        for p in parts {
            h.update([0x1f]);
            h.update(p.as_bytes());
        }
        hex::encode(h.finalize())
    }

    fn path(&self, key: &str) -> PathBuf {
        self.root.join(format!("v{CACHE_VERSION}")).join(&key[..2]).join(format!("{key}.json"))
    }

    /// A stored series, or `None` on a miss, a version mismatch or an
    /// unreadable entry.
    pub fn get(&self, key: &str) -> Option<QSeries> {
        let text = fs::read_to_string(self.path(key)).ok()?;
        let entry: Entry = serde_json::from_str(&text).ok()?;
        if entry.version != CACHE_VERSION || entry.key != key {
            return None;
        }
        series_from_wire(&entry.series).ok()
    }

    pub fn put(&self, key: &str, s: &QSeries) -> io::Result<()> {
        let path = self.path(key);
        let dir = path.parent().expect("entry path has a parent");
        fs::create_dir_all(dir)?;
        let entry = Entry { version: CACHE_VERSION, key: key.to_string(), series: series_to_wire(s) };
        let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
        serde_json::to_writer(&mut tmp, &entry)?;
        tmp.flush()?;
        tmp.persist(&path).map_err(|e| e.error)?;
        Ok(())
    }

    pub fn get_or_try<E, F>(&self, key: &str, compute: F) -> Result<QSeries, E>
    where
        F: FnOnce() -> Result<QSeries, E>,
    {
        if let Some(s) = self.get(key) {
            return Ok(s);
        }
        let s = compute()?;
        if let Err(e) = self.put(key, &s) {
            eprintln!("warning: cache write to {} failed: {e}", self.root.display());
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bps_core::geometry::SurfaceId;
    use bps_core::modular::rank1_series;
    use bps_core::series::qexp;

    #[test]
    fn store_and_load() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let s = rank1_series(SurfaceId::Hirzebruch(1), qexp(4, 1));
        let key = Cache::key(&["rank1", "h1"]);
        assert!(cache.get(&key).is_none());
        cache.put(&key, &s).unwrap();
        assert_eq!(cache.get(&key), Some(s));
    }

    #[test]
    fn version_mismatch_is_a_miss() {
        let dir = tempfile::tempdir().unwrap();
        let cache = Cache::new(dir.path());
        let key = Cache::key(&["x"]);
        cache.put(&key, &QSeries::one()).unwrap();
        let path = cache.path(&key);
        let text = fs::read_to_string(&path).unwrap().replace("\"version\":1", "\"version\":0");
        fs::write(&path, text).unwrap();
        assert!(cache.get(&key).is_none());
        let s = cache.get_or_try::<(), _>(&key, || Ok(QSeries::zero_to(qexp(1, 1)))).unwrap();
        assert_eq!(cache.get(&key), Some(s));
    }

    #[test]
    fn keys_separate_parts() {
        assert_ne!(Cache::key(&["ab", "c"]), Cache::key(&["a", "bc"]));
        assert_eq!(Cache::key(&["a"]).len(), 64);
    }
}
