//! Tiny deterministic random-number generator.
//!
//! The synthetic cost model must be reproducible given a seed alone, with
//! per-(config, draw, metric) streams that can be generated in any order.
//! A splitmix64 state with hand-mixed stream keys keeps that property
//! without external dependencies.

/// splitmix64: fast, well-mixed 64-bit generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Derive an independent stream from a base seed and a key, so draws
    /// are a pure function of (seed, key) rather than call order.
    pub fn stream(seed: u64, key: u64) -> Self {
        let mut s = SplitMix64::new(seed ^ key.wrapping_mul(0x9e3779b97f4a7c15));
        s.next_u64();
        s
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    /// Uniform draw in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal draw via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        // u1 in (0, 1] so the log is finite
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// FNV-1a style key mixer for building stream keys from small integers.
pub fn mix_key(parts: &[u64]) -> u64 {
    let mut hash: u64 = 0xcbf29ce484222325;
    for &p in parts {
        for byte in p.to_le_bytes() {
            hash ^= byte as u64;
            hash = hash.wrapping_mul(0x100000001b3);
        }
    }
    hash
}
