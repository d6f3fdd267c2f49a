//! Thread-safe parameter store and memo cache for concurrent workers.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, MutexGuard, PoisonError};

use filmsearch_core::a3c::{A3cError, ActorCritic, Gradients, GlobalParams, ParamStore};
use filmsearch_core::design::{CacheEntry, CacheStats, MeritCache};
use filmsearch_core::material::MaterialId;

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(PoisonError::into_inner)
}

/// Global network behind a mutex: snapshots and updates are atomic.
#[derive(Debug)]
pub struct SharedParams(Mutex<GlobalParams>);

impl SharedParams {
    pub fn new(params: GlobalParams) -> Self {
        Self(Mutex::new(params))
    }

    pub fn into_inner(self) -> GlobalParams {
        self.0.into_inner().unwrap_or_else(PoisonError::into_inner)
    }
}

impl ParamStore for SharedParams {
    fn snapshot(&self) -> ActorCritic {
        lock(&self.0).net.clone()
    }

    fn apply(&self, grads: &Gradients) -> Result<u64, A3cError> {
        lock(&self.0).apply(grads)
    }

    fn version(&self) -> u64 {
        lock(&self.0).version
    }
}

type Slot = Arc<Mutex<Option<CacheEntry>>>;

/// Memo cache with one lock per tuple. The first worker to ask for a tuple
/// computes it while later askers for the same tuple wait on its slot, so
/// every tuple is optimized at most once. Different tuples proceed in
/// parallel.
#[derive(Debug, Default)]
pub struct SharedCache {
    slots: Mutex<BTreeMap<Vec<MaterialId>, Slot>>,
    hits: AtomicUsize,
    misses: AtomicUsize,
}

impl SharedCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(&self, key: &[MaterialId]) -> Slot {
        let mut slots = lock(&self.slots);
        match slots.get(key) {
            Some(s) => Arc::clone(s),
            None => {
                let s = Slot::default();
                slots.insert(key.to_vec(), Arc::clone(&s));
                s
            }
        }
    }
}

impl MeritCache for SharedCache {
    fn get_or_compute<E, F>(&self, key: &[MaterialId], compute: F) -> Result<(CacheEntry, bool), E>
    where
        F: FnOnce() -> Result<CacheEntry, E>,
    {
        let slot = self.slot(key);
        let mut guard = lock(&slot);
        if let Some(entry) = guard.as_ref() {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok((entry.clone(), true));
        }
        let entry = compute()?;
        self.misses.fetch_add(1, Ordering::Relaxed);
        *guard = Some(entry.clone());
        Ok((entry, false))
    }

    fn seed(&self, key: Vec<MaterialId>, entry: CacheEntry) {
        let slot = self.slot(&key);
        lock(&slot).get_or_insert(entry);
    }

    fn stats(&self) -> CacheStats {
        CacheStats { hits: self.hits.load(Ordering::Relaxed), misses: self.misses.load(Ordering::Relaxed) }
    }

    fn entries(&self) -> Vec<(Vec<MaterialId>, CacheEntry)> {
        let slots: Vec<(Vec<MaterialId>, Slot)> =
            lock(&self.slots).iter().map(|(k, s)| (k.clone(), Arc::clone(s))).collect();
        slots.into_iter().filter_map(|(k, s)| lock(&s).clone().map(|e| (k, e))).collect()
    }
}
