//! Seeded bucket/sign derivation for the sparse projection.
//!
//! Every `(coordinate, repetition)` pair gets a bucket in `[0, m)` and a sign
//! in `{-1, +1}` computed from the codec seed alone. The recipe is fixed and
//! platform independent so sketch files are bit-exact everywhere:
//!
//! ```text
//! w      = mix64(seed ^ mix64((i << 32) | j))
//! bucket = ((w >> 32) * m) >> 32
//! sign   = if w & 1 == 0 { +1 } else { -1 }
//! ```

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
const MUL1: u64 = 0xBF58_476D_1CE4_E5B9;
const MUL2: u64 = 0x94D0_49BB_1331_11EB;

/// SplitMix64 finalizer applied to `x + GAMMA`.
#[inline]
pub const fn mix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(MUL1);
    z = (z ^ (z >> 27)).wrapping_mul(MUL2);
    z ^ (z >> 31)
}

/// Bucket and sign for one `(coordinate, repetition)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Draw {
    pub bucket: u32,
    pub sign: i8,
}

impl Draw {
    #[inline]
    pub fn sign_f64(self) -> f64 {
        f64::from(self.sign)
    }
}

/// Derives the draw for input coordinate `i`, repetition `j`, in a sketch of
/// dimension `m` (`1 <= m <= 2^16`).
#[inline]
pub fn draw(seed: u64, i: u32, j: u32, m: u32) -> Draw {
    debug_assert!((1..=1 << 16).contains(&m));
    let key = (u64::from(i) << 32) | u64::from(j);
    let w = mix64(seed ^ mix64(key));
    let bucket = (((w >> 32) * u64::from(m)) >> 32) as u32;
    let sign = if w & 1 == 0 { 1 } else { -1 };
    Draw { bucket, sign }
}

/// Sequential SplitMix64 generator over [`mix64`].
///
/// Used for synthetic data; the codec itself never consumes a stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        let out = mix64(self.state);
        self.state = self.state.wrapping_add(GAMMA);
        out
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}
