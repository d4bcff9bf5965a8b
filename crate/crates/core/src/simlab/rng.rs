//! Replication-addressable random streams.
//!
//! Every replication draws from its own ChaCha8 stream. The key is derived
//! from the master seed and the purpose of the draws (coverage run, MAE
//! truth run, ...) together with the design cell; the stream id is the
//! replication index. A replication's draws therefore depend only on
//! `(master, purpose, cell, replication)`, never on scheduling.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::stats::normal_quantile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Coverage = 1,
    MaeTruth = 2,
    MaeReplication = 3,
    Rates = 4,
    Generic = 5,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub struct StreamRng {
    inner: ChaCha8Rng,
}

impl StreamRng {
    pub fn new(master: u64, purpose: Purpose, cell: u64, replication: u64) -> Self {
        let key = splitmix(splitmix(master ^ splitmix(purpose as u64)) ^ cell);
        let mut inner = ChaCha8Rng::seed_from_u64(key);
        inner.set_stream(replication);
        Self { inner }
    }

    /// Single stream keyed by a seed alone.
    pub fn from_seed(seed: u64) -> Self {
        Self::new(seed, Purpose::Generic, 0, 0)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on the open interval (0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        ((self.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by inversion.
    pub fn normal(&mut self) -> f64 {
        normal_quantile(self.uniform())
    }

    pub fn exponential(&mut self) -> f64 {
        -libm::log(self.uniform())
    }
}

/// Cell id of an `(n, p)` design point.
pub fn cell_id(n: usize, p: usize) -> u64 {
    ((n as u64) << 16) | p as u64
}
