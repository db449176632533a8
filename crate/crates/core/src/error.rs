use thiserror::Error;

/// A violated [`CodecConfig`](crate::CodecConfig) invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("input dimension out of range: {0} (expected 1 <= d < 2^32)")]
    DimensionOutOfRange(u64),
    #[error("sketch dimension out of range: {0} (expected 1 <= m <= 65536)")]
    SketchDimOutOfRange(u64),
    #[error("bits out of range: {0} (expected 1 <= b <= 16)")]
    BitsOutOfRange(u64),
    #[error("sparsity out of range: {0} (expected 1 <= s < 2^32)")]
    SparsityOutOfRange(u64),
    #[error("clip range must be positive and finite, got {0}")]
    ClipRange(f64),
    #[error("norm bounds must be finite with lmin < lmax, got lmin={lmin} lmax={lmax}")]
    NormBounds { lmin: f64, lmax: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("non-finite value at coordinate {index}")]
    NonFiniteInput { index: usize },
    #[error("unencodable vector: norm is {0}")]
    Unencodable(f64),
    #[error("non-finite sketch coordinate {0}")]
    NonFiniteCoordinate(f64),
    #[error("bits out of range: {0} (expected 1 <= b <= 16)")]
    InvalidBits(u8),
    #[error("code {code} out of range for {bits}-bit quantizer (max {max})")]
    CodeOutOfRange { code: u32, bits: u8, max: u32 },
    #[error("packed length {got} does not match {expected} bytes for m={m}, b={b}")]
    PackedLength { expected: usize, got: usize, m: usize, b: u8 },
    #[error("nonzero pad bits in final byte")]
    NonzeroPadBits,
    #[error("norm {0} is not a positive finite value")]
    InvalidNorm(f64),
    #[error("norm code must be present iff metric is dot")]
    NormCodePresence,
    #[error("duplicate id {0}")]
    DuplicateId(u64),
    #[error("top-k requires k >= 1")]
    ZeroK,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
