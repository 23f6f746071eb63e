//! Reproducible random streams.
//!
//! Every randomized step in the crate draws from [`SplitMix64`], a 64-bit
//! generator whose whole state is one counter. Streams are reproducible from
//! any language with wrapping 64-bit arithmetic:
//!
//! ```text
//! state += 0x9E3779B97F4A7C15
//! z = state
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//! return z ^ (z >> 31)
//! ```
//!
//! Derived quantities:
//!
//! * `unit_f64`: `(next_u64 >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * `below(n)`: `(next_u64 as u128 * n) >> 64`, uniform on `0..n` up to a
//!   bias below `n / 2^64`.
//! * `uniform(lo, hi)`: `lo + (hi - lo) * unit_f64`.
//! * `shuffle`: Fisher-Yates from the last index down, `j = below(i + 1)`.
//!
//! Substreams are derived with [`derive_seed`], which feeds the master seed and
//! each index through the same finalizer.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of substream `(a, b)` under `master`:
/// `mix64(mix64(master ^ mix64(a + 1)) ^ mix64(b + 1 + 2^63))`.
///
/// `mix64` is a bijection, so for a fixed master and fixed `a` distinct `b`
/// give distinct seeds.
pub fn derive_seed(master: u64, a: u64, b: u64) -> u64 {
    let inner = mix64(master ^ mix64(a.wrapping_add(1)));
    mix64(inner ^ mix64(b.wrapping_add(1).wrapping_add(1 << 63)))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Generator for substream `(a, b)` of `master`.
    pub fn substream(master: u64, a: u64, b: u64) -> Self {
        Self::new(derive_seed(master, a, b))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    pub fn unit_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit_f64()
    }

    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit_f64() < p
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }

    /// Draws an index from unnormalized nonnegative `weights` by inversion.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let total: f64 = weights.iter().sum();
        let target = self.unit_f64() * total;
        let mut acc = 0.0;
        for (i, &w) in weights.iter().enumerate() {
            acc += w;
            if target < acc {
                return i;
            }
        }
        // Rounding can leave target == total; fall back to the last positive weight.
        weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
    }
}
