//! Fiat–Shamir challenges and seeded nonce derivation.

use num_bigint::BigUint;
use serde_json::Value;
use sha2::{Digest as _, Sha256, Sha512};

use super::group::GroupParams;
use crate::canonical;

/// Length-prefixed SHA-256 transcript:
/// `domain_tag ‖ params digest ‖ statement ‖ first messages`, with the last
/// two encoded as canonical JSON.
pub struct Transcript {
    hasher: Sha256,
}

impl Transcript {
    pub fn new(domain_tag: &str, params: &GroupParams) -> Self {
        let mut t = Transcript {
            hasher: Sha256::new(),
        };
        t.append_bytes(domain_tag.as_bytes());
        t.append_bytes(params.id().as_bytes());
        t
    }

    pub fn append_bytes(&mut self, bytes: &[u8]) {
        self.hasher.update((bytes.len() as u64).to_be_bytes());
        self.hasher.update(bytes);
    }

    pub fn append_json(&mut self, value: &Value) {
        let bytes = canonical::value_to_vec(value).expect("transcript values are canonical");
        self.append_bytes(&bytes);
    }

    /// Big-endian hash output reduced mod q.
    pub fn challenge(self, params: &GroupParams) -> BigUint {
        BigUint::from_bytes_be(&self.hasher.finalize()) % params.q()
    }
}

/// Deterministic per-proof randomness.
///
/// The caller's seed is hashed together with the proof's domain tag, its
/// public statement and its witness, and each draw mixes in a running
/// counter. Two different proofs therefore never share a nonce even when the
/// caller passes the same seed.
pub struct NonceStream {
    key: [u8; 32],
    counter: u64,
}

impl NonceStream {
    pub fn new(domain_tag: &str, seed: &[u8], statement: &[u8], witness: &[&BigUint]) -> Self {
        let mut h = Sha256::new();
        for part in [domain_tag.as_bytes(), seed, statement] {
            h.update((part.len() as u64).to_be_bytes());
            h.update(part);
        }
        for w in witness {
            let bytes = w.to_bytes_be();
            h.update((bytes.len() as u64).to_be_bytes());
            h.update(&bytes);
        }
        NonceStream {
            key: h.finalize().into(),
            counter: 0,
        }
    }

    /// 512 hash bits reduced mod q; the bias is negligible for q of 255 bits.
    pub fn next_scalar(&mut self, params: &GroupParams) -> BigUint {
        let mut h = Sha512::new();
        h.update(self.key);
        h.update(self.counter.to_be_bytes());
        self.counter += 1;
        BigUint::from_bytes_be(&h.finalize()) % params.q()
    }
}
