use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::C64;

/// Deterministic random stream backed by ChaCha8.
///
/// Every scalar draw (normal or uniform) advances `counter` by one, and the
/// sequence depends only on `seed` and the order of draws. Complex normal
/// entries consume two draws: the real part first, then the imaginary part.
#[derive(Clone, Debug)]
pub struct SeededStream {
    seed: u64,
    counter: u64,
    rng: ChaCha8Rng,
}

impl SeededStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            counter: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn counter(&self) -> u64 {
        self.counter
    }

    /// Independent child stream; the child seed is a SplitMix64 hash of
    /// `(seed, index)` so substreams of different parents do not collide.
    pub fn substream(&self, index: u64) -> SeededStream {
        SeededStream::new(derive_seed(self.seed, index))
    }

    pub fn next_gaussian(&mut self) -> f64 {
        self.counter += 1;
        self.rng.sample(StandardNormal)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_uniform(&mut self) -> f64 {
        self.counter += 1;
        self.rng.random::<f64>()
    }

    pub fn gaussian_real(&mut self, count: usize) -> Vec<f64> {
        (0..count).map(|_| self.next_gaussian()).collect()
    }

    /// Entries `x + iy` with `x, y` standard normal, so `E|entry|^2 = 2`.
    pub fn gaussian_complex(&mut self, count: usize) -> Vec<C64> {
        (0..count)
            .map(|_| {
                let re = self.next_gaussian();
                let im = self.next_gaussian();
                C64::new(re, im)
            })
            .collect()
    }
}

pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(seed ^ splitmix64(index.wrapping_add(0x9E37_79B9_7F4A_7C15)))
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
