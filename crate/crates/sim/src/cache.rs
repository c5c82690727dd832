use std::sync::{Arc, RwLock};

use rdz_core::propagation::{resolve_cached, CacheAccess, CacheStats, FieldCache};
use rdz_core::{FieldProvider, Grid, RfMap, RfSettings, Transmitter};

/// Field cache shared by concurrently running trials. Lookups take the read
/// lock; only inserts take the write lock.
#[derive(Debug)]
pub struct SharedFieldCache(RwLock<FieldCache>);

impl SharedFieldCache {
    pub fn new(capacity: usize) -> Self {
        Self(RwLock::new(FieldCache::new(capacity)))
    }

    pub fn stats(&self) -> CacheStats {
        self.read(|c| c.stats())
    }
}

impl CacheAccess for SharedFieldCache {
    fn read<R>(&self, f: impl FnOnce(&FieldCache) -> R) -> R {
        f(&self.0.read().unwrap_or_else(|e| e.into_inner()))
    }

    fn write<R>(&self, f: impl FnOnce(&mut FieldCache) -> R) -> R {
        f(&mut self.0.write().unwrap_or_else(|e| e.into_inner()))
    }
}

impl FieldProvider for SharedFieldCache {
    fn single_source(&self, tx: &Transmitter, rf: &RfSettings, grid: &Grid) -> Arc<RfMap> {
        resolve_cached(self, tx, rf, grid)
    }
}
