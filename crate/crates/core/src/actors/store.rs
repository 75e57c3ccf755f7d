use std::collections::BTreeMap;

use crate::codec::content_digest;

/// In-memory content-addressed blob store keyed by hex SHA-256.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ContentStore {
    blobs: BTreeMap<String, Vec<u8>>,
}

impl ContentStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn key_for(bytes: &[u8]) -> String {
        hex::encode(content_digest(bytes))
    }

    /// Stores `bytes` and returns their digest. Storing the same bytes
    /// twice is a no-op.
    pub fn put(&mut self, bytes: Vec<u8>) -> String {
        let key = Self::key_for(&bytes);
        self.blobs.entry(key.clone()).or_insert(bytes);
        key
    }

    pub fn get(&self, key: &str) -> Option<&[u8]> {
        self.blobs.get(key).map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.blobs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blobs.is_empty()
    }

    /// Recomputes every key from its contents.
    pub fn verify(&self) -> bool {
        self.blobs.iter().all(|(k, v)| *k == Self::key_for(v))
    }
}
