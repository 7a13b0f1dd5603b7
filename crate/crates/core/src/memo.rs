//! Concurrency-safe caches for truncated series.

use std::collections::HashMap;
use std::hash::Hash;

use parking_lot::RwLock;

use crate::series::{QExp, QSeries};

/// Keeps, per key, the series with the largest cutoff seen so far and serves
/// smaller requests by truncation.
pub struct SeriesCache<K> {
    map: RwLock<HashMap<K, QSeries>>,
}

impl<K: Eq + Hash + Clone> Default for SeriesCache<K> {
    fn default() -> Self {
        SeriesCache { map: RwLock::new(HashMap::new()) }
    }
}

fn covers(s: &QSeries, cutoff: QExp) -> bool {
    s.cutoff().is_none_or(|c| c >= cutoff)
}

impl<K: Eq + Hash + Clone> SeriesCache<K> {
    pub fn get_or_try<E, F>(&self, key: &K, cutoff: QExp, compute: F) -> Result<QSeries, E>
    where
        F: FnOnce() -> Result<QSeries, E>,
    {
        if let Some(s) = self.map.read().get(key) {
            if covers(s, cutoff) {
                return Ok(s.truncate(cutoff));
            }
        }
        let s = compute()?;
        let mut map = self.map.write();
        let keep = match map.get(key) {
            Some(old) => !covers(old, s.cutoff().unwrap_or(cutoff)),
            None => true,
        };
        if keep {
            map.insert(key.clone(), s.clone());
        }
        Ok(s.truncate(cutoff))
    }

    pub fn get_or<F: FnOnce() -> QSeries>(&self, key: &K, cutoff: QExp, compute: F) -> QSeries {
        self.get_or_try::<std::convert::Infallible, _>(key, cutoff, || Ok(compute())).unwrap()
    }

    pub fn clear(&self) {
        self.map.write().clear();
    }
}
