//! Hierarchical, schedule-independent random streams.
//!
//! A stream is a master seed plus a path of integers (repetition index,
//! purpose tag, ...). The generator is keyed by a SHA-256 digest of both, so
//! any two distinct paths give unrelated ChaCha streams and the draws never
//! depend on which thread asks for them.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha8Rng;

/// Purpose tags used as the last path element by the harness.
pub mod purpose {
    pub const NOISE: u64 = 1;
    pub const SIGNAL: u64 = 2;
    pub const PROPERTY: u64 = 3;
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedStream {
    pub master_seed: u64,
    #[serde(default)]
    pub path: Vec<u64>,
}

impl SeedStream {
    pub fn new(master_seed: u64) -> Self {
        SeedStream { master_seed, path: Vec::new() }
    }

    /// Child stream with `path` appended.
    pub fn derive(&self, path: &[u64]) -> SeedStream {
        let mut p = self.path.clone();
        p.extend_from_slice(path);
        SeedStream { master_seed: self.master_seed, path: p }
    }

    fn digest(&self) -> [u8; 32] {
        let mut hasher = Sha256::new();
        hasher.update(b"cubepersist-seed-v1");
        hasher.update(self.master_seed.to_le_bytes());
        hasher.update((self.path.len() as u64).to_le_bytes());
        for p in &self.path {
            hasher.update(p.to_le_bytes());
        }
        hasher.finalize().into()
    }

    /// 64-bit summary of the stream key, recorded in reports.
    pub fn seed_u64(&self) -> u64 {
        u64::from_le_bytes(self.digest()[..8].try_into().unwrap())
    }

    pub fn rng(&self) -> StreamRng {
        ChaCha8Rng::from_seed(self.digest())
    }
}

/// Generator for `path` under `stream`.
pub fn derive_rng(stream: &SeedStream, path: &[u64]) -> StreamRng {
    stream.derive(path).rng()
}
