//! Configuration, encoding, query sketching and asymmetric scoring.
//!
//! A database vector `x` is encoded as
//!
//! 1. `u = x / |x|`
//! 2. `z = sqrt(m) * R u`, with `R` the seeded sparse signed projection
//! 3. `q_k = round(L * (clip(z_k, -c, c) + c) / 2c)`, `L = 2^b - 1`
//! 4. the codes `q` bit-packed at `b` bits each
//!
//! plus, in dot mode, a 16-bit log2-norm code. Queries keep the float sketch
//! `a = sqrt(m) * R (r / |r|)` and are scored with `(1/m) sum_k a_k zhat_k`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitpack::{self, Codes};
use crate::error::{ConfigError, Error, Result};
use crate::hash;

/// Largest value of the log-norm code.
pub const NORM_LEVELS: f64 = 65535.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    /// Scores estimate the cosine between query and database vector.
    Cosine,
    /// Scores estimate the dot product; encoded vectors carry a norm code.
    Dot,
}

impl Metric {
    pub fn code(self) -> u8 {
        match self {
            Metric::Cosine => 0,
            Metric::Dot => 1,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Metric::Cosine),
            1 => Some(Metric::Dot),
            _ => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Cosine => "cosine",
            Metric::Dot => "dot",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cosine" | "cos" => Ok(Metric::Cosine),
            "dot" => Ok(Metric::Dot),
            other => Err(format!("unknown metric '{other}' (expected cosine or dot)")),
        }
    }
}

/// Unvalidated codec parameters. `Default` is the 384-d sentence-embedding
/// profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfigParams {
    pub d: u64,
    pub m: u64,
    pub b: u64,
    pub s: u64,
    pub c: f64,
    pub metric: Metric,
    pub seed: u64,
    pub l_min: f64,
    pub l_max: f64,
}

impl Default for ConfigParams {
    fn default() -> Self {
        Self {
            d: 384,
            m: 96,
            b: 4,
            s: 4,
            c: 3.0,
            metric: Metric::Cosine,
            seed: 12345,
            l_min: -32.0,
            l_max: 32.0,
        }
    }
}

impl ConfigParams {
    pub fn validate(&self) -> Result<CodecConfig, ConfigError> {
        if self.d == 0 || self.d >= 1 << 32 {
            return Err(ConfigError::DimensionOutOfRange(self.d));
        }
        if self.m == 0 || self.m > 1 << 16 {
            return Err(ConfigError::SketchDimOutOfRange(self.m));
        }
        if self.b == 0 || self.b > u64::from(bitpack::MAX_BITS) {
            return Err(ConfigError::BitsOutOfRange(self.b));
        }
        if self.s == 0 || self.s >= 1 << 32 {
            return Err(ConfigError::SparsityOutOfRange(self.s));
        }
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(ConfigError::ClipRange(self.c));
        }
        if !(self.l_min.is_finite() && self.l_max.is_finite() && self.l_min < self.l_max) {
            return Err(ConfigError::NormBounds { lmin: self.l_min, lmax: self.l_max });
        }
        Ok(CodecConfig {
            d: self.d as u32,
            m: self.m as u32,
            b: self.b as u8,
            s: self.s as u32,
            c: self.c,
            metric: self.metric,
            seed: self.seed,
            l_min: self.l_min,
            l_max: self.l_max,
        })
    }
}

/// Validated, immutable codec configuration.
///
/// All encoding and scoring goes through this type; it holds no state beyond
/// the parameters, so it is `Copy` and can be shared freely across threads.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodecConfig {
    d: u32,
    m: u32,
    b: u8,
    s: u32,
    c: f64,
    metric: Metric,
    seed: u64,
    l_min: f64,
    l_max: f64,
}

impl Default for CodecConfig {
    fn default() -> Self {
        Self::default_profile()
    }
}

impl CodecConfig {
    /// d=384, m=96, b=4, s=4, c=3, cosine, seed 12345.
    pub fn default_profile() -> Self {
        ConfigParams::default().validate().expect("default profile is valid")
    }

    pub fn params(&self) -> ConfigParams {
        ConfigParams {
            d: u64::from(self.d),
            m: u64::from(self.m),
            b: u64::from(self.b),
            s: u64::from(self.s),
            c: self.c,
            metric: self.metric,
            seed: self.seed,
            l_min: self.l_min,
            l_max: self.l_max,
        }
    }

    pub fn dim(&self) -> usize {
        self.d as usize
    }

    pub fn sketch_dim(&self) -> usize {
        self.m as usize
    }

    pub fn bits(&self) -> u8 {
        self.b
    }

    pub fn sparsity(&self) -> u32 {
        self.s
    }

    pub fn clip(&self) -> f64 {
        self.c
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn l_min(&self) -> f64 {
        self.l_min
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    /// Highest quantizer code, `2^b - 1`.
    pub fn levels(&self) -> u32 {
        (1u32 << self.b) - 1
    }

    /// Quantizer cell width `2c / L`.
    pub fn step(&self) -> f64 {
        2.0 * self.c / f64::from(self.levels())
    }

    pub fn packed_len(&self) -> usize {
        bitpack::packed_len(self.sketch_dim(), self.b)
    }

    /// Stored bytes per vector: packed codes plus two in dot mode.
    pub fn code_size_bytes(&self) -> usize {
        self.packed_len() + if self.metric == Metric::Dot { 2 } else { 0 }
    }

    /// Bytes of the same vector stored as dense `f32`.
    pub fn dense_bytes(&self) -> usize {
        4 * self.dim()
    }

    pub fn compression_ratio(&self) -> f64 {
        self.code_size_bytes() as f64 / self.dense_bytes() as f64
    }

    pub fn quantize(&self, z: f64) -> Result<u16> {
        if !z.is_finite() {
            return Err(Error::NonFiniteCoordinate(z));
        }
        Ok(self.quantize_finite(z))
    }

    #[inline]
    fn quantize_finite(&self, z: f64) -> u16 {
        let c = self.c;
        let levels = f64::from(self.levels());
        let clipped = z.clamp(-c, c);
        let q = (levels * (clipped + c) / (2.0 * c) + 0.5).floor();
        q.clamp(0.0, levels) as u16
    }

    pub fn dequantize(&self, q: u16) -> Result<f64> {
        let max = self.levels();
        if u32::from(q) > max {
            return Err(Error::CodeOutOfRange { code: u32::from(q), bits: self.b, max });
        }
        Ok(self.dequantize_unchecked(q))
    }

    #[inline]
    fn dequantize_unchecked(&self, q: u16) -> f64 {
        2.0 * self.c * f64::from(q) / f64::from(self.levels()) - self.c
    }

    pub fn encode_norm(&self, norm: f64) -> Result<u16> {
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidNorm(norm));
        }
        let l = norm.log2().clamp(self.l_min, self.l_max);
        let n = (NORM_LEVELS * (l - self.l_min) / (self.l_max - self.l_min) + 0.5).floor();
        Ok(n.clamp(0.0, NORM_LEVELS) as u16)
    }

    pub fn decode_norm(&self, n: u16) -> f64 {
        let l = self.l_min + f64::from(n) * (self.l_max - self.l_min) / NORM_LEVELS;
        l.exp2()
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got });
        }
        Ok(())
    }

    /// `R u` for a vector the caller has already normalized. Linear in `u`.
    pub fn project_unit<T: Copy + Into<f64>>(&self, u: &[T]) -> Result<Vec<f64>> {
        self.check_dim(u.len())?;
        let mut y = vec![0.0f64; self.sketch_dim()];
        self.project_into(u.iter().map(|&v| v.into()), &mut y);
        Ok(y)
    }

    fn project_into(&self, u: impl Iterator<Item = f64>, y: &mut [f64]) {
        let sqrt_s = f64::from(self.s).sqrt();
        for (i, ui) in u.enumerate() {
            let w = ui / sqrt_s;
            for j in 0..self.s {
                let dr = hash::draw(self.seed, i as u32, j, self.m);
                y[dr.bucket as usize] += dr.sign_f64() * w;
            }
        }
    }

    /// `sqrt(m) * R (x / |x|)` and `|x|`.
    fn unit_sketch<T: Copy + Into<f64>>(&self, x: &[T]) -> Result<(Vec<f64>, f64)> {
        self.check_dim(x.len())?;
        let mut sq = 0.0f64;
        for (index, &v) in x.iter().enumerate() {
            let v: f64 = v.into();
            if !v.is_finite() {
                return Err(Error::NonFiniteInput { index });
            }
            sq += v * v;
        }
        let norm = sq.sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::Unencodable(norm));
        }
        let mut y = vec![0.0f64; self.sketch_dim()];
        self.project_into(x.iter().map(|&v| v.into() / norm), &mut y);
        let scale = f64::from(self.m).sqrt();
        for v in &mut y {
            *v *= scale;
        }
        Ok((y, norm))
    }

    /// Encodes a database vector.
    pub fn encode<T: Copy + Into<f64>>(&self, x: &[T]) -> Result<EncodedVector> {
        self.encode_traced(x).map(|t| t.encoded)
    }

    /// Like [`encode`](Self::encode) but also returns the pre-clip sketch
    /// `z`, which is what the score error bound is stated against.
    pub fn encode_traced<T: Copy + Into<f64>>(&self, x: &[T]) -> Result<EncodeTrace> {
        let (z, norm) = self.unit_sketch(x)?;
        let codes: Vec<u16> = z.iter().map(|&v| self.quantize_finite(v)).collect();
        let mut packed = vec![0u8; self.packed_len()];
        bitpack::pack_into(&codes, self.b, &mut packed);
        let norm_code = match self.metric {
            Metric::Cosine => None,
            Metric::Dot => Some(self.encode_norm(norm)?),
        };
        Ok(EncodeTrace { encoded: EncodedVector { packed, norm_code }, z, norm })
    }

    pub fn encode_query<T: Copy + Into<f64>>(&self, r: &[T]) -> Result<QuerySketch> {
        let (sketch, query_norm) = self.unit_sketch(r)?;
        Ok(QuerySketch { sketch, query_norm })
    }

    /// Asymmetric score of a float query sketch against a stored code.
    ///
    /// Both sides must come from this config; the index and file loaders
    /// enforce that. Cosine mode returns the cosine estimate, dot mode scales
    /// it by the query norm and the decoded database norm.
    pub fn score(&self, query: &QuerySketch, encoded: &EncodedVector) -> f64 {
        debug_assert_eq!(query.sketch.len(), self.sketch_dim());
        debug_assert_eq!(encoded.packed.len(), self.packed_len());
        let codes = Codes::new(&encoded.packed, self.sketch_dim(), self.b);
        let mut acc = 0.0f64;
        for (&a, q) in query.sketch.iter().zip(codes) {
            acc += a * self.dequantize_unchecked(q);
        }
        let cos = acc / f64::from(self.m);
        match (self.metric, encoded.norm_code) {
            (Metric::Dot, Some(n)) => cos * query.query_norm * self.decode_norm(n),
            _ => cos,
        }
    }

    /// Quantized codes of an encoded vector.
    pub fn codes<'a>(&self, encoded: &'a EncodedVector) -> Codes<'a> {
        Codes::new(&encoded.packed, self.sketch_dim(), self.b)
    }
}

/// Stored form of one database vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EncodedVector {
    packed: Vec<u8>,
    norm_code: Option<u16>,
}

impl EncodedVector {
    /// Rebuilds a stored vector, checking it against `config`.
    pub fn from_parts(config: &CodecConfig, packed: Vec<u8>, norm_code: Option<u16>) -> Result<Self> {
        let packed = bitpack::PackedCodes::from_bytes(packed, config.sketch_dim(), config.bits())?
            .into_bytes();
        if norm_code.is_some() != (config.metric() == Metric::Dot) {
            return Err(Error::NormCodePresence);
        }
        Ok(Self { packed, norm_code })
    }

    pub fn packed(&self) -> &[u8] {
        &self.packed
    }

    pub fn norm_code(&self) -> Option<u16> {
        self.norm_code
    }

    /// Serialized payload: packed codes, then the little-endian norm code
    /// when present.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.payload_len());
        self.write_payload(&mut out);
        out
    }

    pub fn write_payload(&self, out: &mut Vec<u8>) {
        out.extend_from_slice(&self.packed);
        if let Some(n) = self.norm_code {
            out.extend_from_slice(&n.to_le_bytes());
        }
    }

    pub fn payload_len(&self) -> usize {
        self.packed.len() + if self.norm_code.is_some() { 2 } else { 0 }
    }
}

/// Float-side sketch of a query.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySketch {
    sketch: Vec<f64>,
    query_norm: f64,
}

impl QuerySketch {
    pub fn sketch(&self) -> &[f64] {
        &self.sketch
    }

    pub fn query_norm(&self) -> f64 {
        self.query_norm
    }
}

/// Output of [`CodecConfig::encode_traced`].
#[derive(Debug, Clone, PartialEq)]
pub struct EncodeTrace {
    pub encoded: EncodedVector,
    /// Rescaled sketch before clipping and quantization.
    pub z: Vec<f64>,
    pub norm: f64,
}
