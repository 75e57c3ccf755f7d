use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};

use crate::group::{hash_bytes, GroupElement};

pub const TAG_LEN: usize = 32;
pub const NONCE_LEN: usize = 12;

/// `t1 = H0(mu)`, `key = H1(mu)`, `tag = H2(t1 || C)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KemOutput {
    pub t1: [u8; 32],
    pub key: [u8; 32],
    pub tag: [u8; TAG_LEN],
}

pub fn kem_derive<E: GroupElement>(mu: &E, blob: &[u8]) -> KemOutput {
    let mu_bytes = mu.to_bytes();
    let t1 = hash_bytes(b"H0", &[&mu_bytes]);
    let key = hash_bytes(b"H1", &[&mu_bytes]);
    let tag = hash_bytes(b"H2", &[&t1, blob]);
    KemOutput { t1, key, tag }
}

/// Recomputes only the tag; the key derivation is skipped.
pub fn tag_for<E: GroupElement>(mu: &E, blob: &[u8]) -> [u8; TAG_LEN] {
    let t1 = hash_bytes(b"H0", &[&mu.to_bytes()]);
    hash_bytes(b"H2", &[&t1, blob])
}

/// `nonce || ChaCha20-Poly1305(key, nonce, message)`.
pub fn seal(key: &[u8; 32], nonce: &[u8; NONCE_LEN], message: &[u8]) -> Vec<u8> {
    let cipher = ChaCha20Poly1305::new(Key::from_slice(key));
    let body = cipher
        .encrypt(Nonce::from_slice(nonce), message)
        .expect("in-memory encryption cannot fail");
    let mut out = Vec::with_capacity(NONCE_LEN + body.len());
    out.extend_from_slice(nonce);
    out.extend_from_slice(&body);
    out
}

pub fn open(key: &[u8; 32], blob: &[u8]) -> Option<Vec<u8>> {
    if blob.len() < NONCE_LEN {
        return None;
    }
    let (nonce, body) = blob.split_at(NONCE_LEN);
    ChaCha20Poly1305::new(Key::from_slice(key))
        .decrypt(Nonce::from_slice(nonce), body)
        .ok()
}
