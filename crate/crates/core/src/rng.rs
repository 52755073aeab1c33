//! Deterministic random primitives for reproducible experiments.
//!
//! Everything downstream of a seed (dataset shuffles, synthetic data, noise)
//! must replay bit-identically on any platform and from any other
//! implementation of the same algorithms, so this module pins the exact
//! generator instead of relying on a random crate whose stream may change
//! between versions:
//!
//! * generator: SplitMix64 (Steele, Lea & Flood 2014), 64-bit state,
//!   output `z = mix(state += 0x9E3779B97F4A7C15)`;
//! * uniform doubles: top 53 bits of the next output, mapped to `[0, 1)`;
//! * shuffles: Fisher–Yates with `j = next_u64() % (i + 1)`;
//! * Gaussians: Box–Muller on two uniforms, cosine branch only.

/// SplitMix64 pseudo-random generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `(0, 1]`; never returns zero, safe under `ln`.
    pub fn next_f64_open(&mut self) -> f64 {
        ((self.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box–Muller (two uniforms, cosine branch).
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = self.next_f64_open();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// In-place Fisher–Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = (self.next_u64() % (i as u64 + 1)) as usize;
            items.swap(i, j);
        }
    }
}

/// Seed for run `r` of an experiment: the `(r + 1)`-th output of the
/// SplitMix64 stream started at `seed`.
pub fn derive_run_seed(seed: u64, run: u64) -> u64 {
    let mut rng = SplitMix64::new(seed);
    let mut out = rng.next_u64();
    for _ in 0..run {
        out = rng.next_u64();
    }
    out
}

/// Deterministic permutation of `0..n` for one experiment run.
pub fn permutation(n: usize, run_seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    SplitMix64::new(run_seed).shuffle(&mut order);
    order
}
