//! Seeded, hierarchically derivable random streams.
//!
//! A child stream's seed is `(parent_seed ^ fnv1a64(label)) * 0x9E3779B97F4A7C15`
//! (wrapping), and the generator is ChaCha8 seeded from that 64-bit value.
//! Derivation depends only on the parent's seed, never on how many values the
//! parent has produced, so results are reproducible given the same hash.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
const MIX: u64 = 0x9E37_79B9_7F4A_7C15;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |h, &b| {
        (h ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    path: String,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            path: String::new(),
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Child stream for `label`. Labels may contain `/` to descend several
    /// levels at once; `derive("a/b")` equals `derive("a").derive("b")`.
    pub fn derive(&self, label: &str) -> RngStream {
        label
            .split('/')
            .filter(|s| !s.is_empty())
            .fold(self.fresh(), |s, part| {
                let seed = (s.seed ^ fnv1a64(part.as_bytes())).wrapping_mul(MIX);
                let path = if s.path.is_empty() {
                    part.to_owned()
                } else {
                    format!("{}/{}", s.path, part)
                };
                RngStream {
                    seed,
                    path,
                    rng: ChaCha8Rng::seed_from_u64(seed),
                }
            })
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &str {
        &self.path
    }

    fn fresh(&self) -> RngStream {
        RngStream {
            seed: self.seed,
            path: self.path.clone(),
            rng: ChaCha8Rng::seed_from_u64(self.seed),
        }
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
