//! Internal memoization keyed by a structure plus auxiliary data.
//!
//! Lookups hash the structure's precomputed digest and compare keys in
//! place, so cache hits never clone tables; only inserts store owned keys.

use crate::structure::FiniteStructure;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};
use std::sync::RwLock;

pub(crate) struct StructCache<K, V> {
    buckets: RwLock<HashMap<u64, Vec<(FiniteStructure, K, V)>>>,
}

impl<K, V> Default for StructCache<K, V> {
    fn default() -> StructCache<K, V> {
        StructCache {
            buckets: RwLock::new(HashMap::new()),
        }
    }
}

impl<K: Hash + PartialEq + Clone, V: Clone> StructCache<K, V> {
    fn slot(s: &FiniteStructure, key: &K) -> u64 {
        let mut hasher = std::collections::hash_map::DefaultHasher::new();
        s.hash(&mut hasher);
        key.hash(&mut hasher);
        hasher.finish()
    }

    pub fn get(&self, s: &FiniteStructure, key: &K) -> Option<V> {
        let slot = Self::slot(s, key);
        let buckets = self.buckets.read().unwrap();
        buckets.get(&slot).and_then(|bucket| {
            bucket
                .iter()
                .find(|(bs, bk, _)| bk == key && bs == s)
                .map(|(_, _, v)| v.clone())
        })
    }

    pub fn insert(&self, s: &FiniteStructure, key: K, value: V) {
        let slot = Self::slot(s, &key);
        let mut buckets = self.buckets.write().unwrap();
        let bucket = buckets.entry(slot).or_default();
        if !bucket.iter().any(|(bs, bk, _)| bk == &key && bs == s) {
            bucket.push((s.clone(), key, value));
        }
    }
}
