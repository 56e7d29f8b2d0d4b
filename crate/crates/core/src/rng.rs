//! Deterministic random streams.
//!
//! Every Monte Carlo path owns a ChaCha8 stream keyed by
//! `(master_seed, substream)` for the 256-bit key and `path_index` for the
//! 64-bit stream id. ChaCha is a counter-mode generator, so two keys never
//! share state and the numbers a path sees do not depend on which worker
//! thread runs it.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

/// Where a stream came from. Carried on sampled paths so any path can be
/// regenerated on its own.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedLineage {
    pub master_seed: u64,
    pub path_index: u64,
    pub substream: u64,
    pub antithetic: bool,
}

/// Standard-normal source for one path.
#[derive(Clone, Debug)]
pub struct PathRng {
    inner: ChaCha8Rng,
    lineage: SeedLineage,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn key(master_seed: u64, substream: u64) -> [u8; 32] {
    let mut out = [0u8; 32];
    let mut z = master_seed ^ splitmix(substream.wrapping_add(0xA5A5_5A5A_0F0F_F0F0));
    for chunk in out.chunks_mut(8) {
        z = splitmix(z);
        chunk.copy_from_slice(&z.to_le_bytes());
    }
    out
}

impl PathRng {
    /// Stream for `path_index` under `master_seed` (substream 0).
    pub fn child(master_seed: u64, path_index: u64) -> Self {
        Self::from_lineage(SeedLineage {
            master_seed,
            path_index,
            substream: 0,
            antithetic: false,
        })
    }

    pub fn from_lineage(lineage: SeedLineage) -> Self {
        let mut inner = ChaCha8Rng::from_seed(key(lineage.master_seed, lineage.substream));
        inner.set_stream(lineage.path_index);
        Self { inner, lineage }
    }

    /// Independent stream for the same path, e.g. for a second process that
    /// must not share noise with the first.
    pub fn substream(&self, k: u64) -> Self {
        Self::from_lineage(SeedLineage {
            substream: self.lineage.substream.wrapping_add(k.wrapping_mul(0x1_0000_0001)),
            ..self.lineage
        })
    }

    /// Same stream with every normal draw negated.
    pub fn antithetic(&self) -> Self {
        let mut twin = Self::from_lineage(self.lineage);
        twin.lineage.antithetic = !self.lineage.antithetic;
        twin
    }

    pub fn lineage(&self) -> SeedLineage {
        self.lineage
    }

    #[inline]
    pub fn normal(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.inner);
        if self.lineage.antithetic {
            -z
        } else {
            z
        }
    }

    pub fn fill_normal(&mut self, out: &mut [f64]) {
        for v in out.iter_mut() {
            *v = self.normal();
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}
