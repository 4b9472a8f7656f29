//! Counter-based random number generator (`cbrng/1`).
//!
//! Every random quantity in this crate is a pure function of
//! `(seed, stream, counter)`, so any run is reproducible bit-for-bit from its
//! seed alone and independent draws can be evaluated in parallel or out of
//! order without a shared generator state.
//!
//! The word function is three applications of the SplitMix64 finalizer:
//!
//! ```text
//! mix(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!         z ^= z >> 27; z *= 0x94D049BB133111EB;
//!         z ^= z >> 31
//!
//! word(seed, stream, counter) =
//!     mix( mix(seed ^ SEED_SALT) ^ mix(stream ^ STREAM_SALT)
//!          + counter * 0x9E3779B97F4A7C15 )
//! ```
//!
//! The u64 stream is the portability contract; floating-point derivations
//! (uniforms via the top 53 bits, normals via Box-Muller) are layered on top.

/// Stream identifiers. Each logically distinct consumer of randomness gets
/// its own stream so adding a consumer never shifts another one's draws.
pub mod stream {
    pub const PARTITION: u64 = 1;
    pub const LOWRANK_LEFT: u64 = 2;
    pub const LOWRANK_RIGHT: u64 = 3;
    pub const OUTLIER_ROWS: u64 = 4;
    pub const OUTLIER_NOISE: u64 = 5;
    pub const GAUSSIAN: u64 = 6;
    pub const RADEMACHER: u64 = 7;
    pub const RANK_RECOVERY: u64 = 8;
    pub const EIGEN_INIT: u64 = 9;
    /// Per-iteration repartitioning derives its stream as `REPARTITION + t`.
    pub const REPARTITION: u64 = 1 << 32;
}

const SEED_SALT: u64 = 0xA076_1D64_78BD_642F;
const STREAM_SALT: u64 = 0xE703_7ED1_A0B4_28DB;
const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix(mut z: u64) -> u64 {
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The raw counter-indexed word.
#[inline]
pub fn word(seed: u64, stream: u64, counter: u64) -> u64 {
    let base = mix(seed ^ SEED_SALT) ^ mix(stream ^ STREAM_SALT);
    mix(base.wrapping_add(counter.wrapping_mul(GOLDEN)))
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
#[inline]
pub fn uniform(seed: u64, stream: u64, counter: u64) -> f64 {
    (word(seed, stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform draw in the open interval `(0, 1)`; safe under `ln`.
#[inline]
fn uniform_open(seed: u64, stream: u64, counter: u64) -> f64 {
    ((word(seed, stream, counter) >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// A Rademacher sign, `+1.0` or `-1.0`.
#[inline]
pub fn sign(seed: u64, stream: u64, counter: u64) -> f64 {
    if word(seed, stream, counter) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Sequential view over one `(seed, stream)` pair.
///
/// Purely a convenience: the k-th value drawn is a function of counter k, so
/// two instances over the same pair always agree.
#[derive(Debug, Clone)]
pub struct CounterRng {
    seed: u64,
    stream: u64,
    counter: u64,
    spare_normal: Option<f64>,
}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self {
            seed,
            stream,
            counter: 0,
            spare_normal: None,
        }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let w = word(self.seed, self.stream, self.counter);
        self.counter += 1;
        w
    }

    /// Uniform in `[0, 1)`.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`.
    #[inline]
    pub fn next_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Unbiased integer in `[0, bound)` by rejection.
    pub fn next_below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "bound must be positive");
        let zone = u64::MAX - (u64::MAX % bound + 1) % bound;
        loop {
            let w = self.next_u64();
            if w <= zone {
                return w % bound;
            }
        }
    }

    /// Standard normal via Box-Muller on consecutive counters.
    pub fn next_gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        let u1 = uniform_open(self.seed, self.stream, self.counter);
        let u2 = uniform(self.seed, self.stream, self.counter + 1);
        self.counter += 2;
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare_normal = Some(r * theta.sin());
        r * theta.cos()
    }

    /// In-place Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            items.swap(i, j);
        }
    }
}
