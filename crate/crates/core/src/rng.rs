//! Deterministic random streams.
//!
//! Every random draw in this crate comes from a ChaCha20 stream keyed by
//! `(seed, domain, index)`. The 32-byte key is the little-endian
//! concatenation `LE64(seed) ‖ LE64(domain) ‖ LE64(index) ‖ LE64(0)`.
//! Distinct domains (and distinct indices within a domain, e.g. one stream
//! per view or per restart) never share a key, so consumers can draw in any
//! order, or in parallel, without perturbing each other. The scheme is easy
//! to reproduce outside this crate: ChaCha20 itself plus the two mappings
//! below (53-bit uniforms, Box-Muller normals) pin down every generated
//! dataset bit for bit.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};

/// Domain tags. One constant per call site family; never reuse a value.
pub mod domain {
    pub const BLOB_LABELS: u64 = 1;
    pub const BLOB_MEANS: u64 = 2;
    pub const BLOB_NOISE: u64 = 3;
    pub const PLANTED_BASIS: u64 = 4;
    pub const KMEANS_RESTART: u64 = 5;
    /// Reserved for tests and oracles; never used by library code.
    pub const TEST: u64 = 1000;
}

const TWO_POW_53: f64 = 9007199254740992.0;

/// One keyed stream. Cheap to construct; make a fresh one per (domain, index).
pub struct StreamRng {
    chacha: ChaCha20Rng,
    spare_normal: Option<f64>,
}

impl StreamRng {
    pub fn new(seed: u64, domain: u64, index: u64) -> Self {
        let mut key = [0u8; 32];
        key[0..8].copy_from_slice(&seed.to_le_bytes());
        key[8..16].copy_from_slice(&domain.to_le_bytes());
        key[16..24].copy_from_slice(&index.to_le_bytes());
        StreamRng {
            chacha: ChaCha20Rng::from_seed(key),
            spare_normal: None,
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.chacha.next_u64()
    }

    /// Uniform in [0, 1): the top 53 bits of one u64, scaled by 2^-53.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / TWO_POW_53
    }

    /// Uniform in (0, 1]; safe as a log argument.
    fn uniform_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 / TWO_POW_53
    }

    /// Standard normal via Box-Muller; draws come in cached pairs.
    pub fn normal(&mut self) -> f64 {
        if let Some(x) = self.spare_normal.take() {
            return x;
        }
        let r = (-2.0 * self.uniform_open().ln()).sqrt();
        let theta = std::f64::consts::TAU * self.uniform();
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// Uniform index in [0, n) by rejection; free of modulo bias.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index bound must be positive");
        let n = n as u64;
        let zone = (u64::MAX / n) * n;
        loop {
            let x = self.next_u64();
            if x < zone {
                return (x % n) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle, high index downward.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.index(i + 1);
            xs.swap(i, j);
        }
    }
}
