//! Stateless compression of dense embeddings into bit-packed sketches.
//!
//! Each database vector is normalized, pushed through a seeded sparse signed
//! projection, rescaled, clipped and scalar-quantized to `b` bits per sketch
//! coordinate. Queries stay in floating point and are scored against the
//! stored codes. Nothing is fitted to the data: the seed alone fixes the
//! projection, so vectors can be encoded one at a time as they arrive.
//!
//! ```
//! use embsketch::{CodecConfig, FlatIndex};
//!
//! let config = CodecConfig::default_profile();
//! assert_eq!(config.code_size_bytes(), 48);
//!
//! let mut index = FlatIndex::new(config);
//! let x: Vec<f32> = (0..384).map(|i| (i as f32 * 0.37).sin()).collect();
//! index.add(7, &x).unwrap();
//! let hits = index.topk(&x, 1).unwrap();
//! assert_eq!(hits[0].id, 7);
//! ```

pub mod bitpack;
pub mod cli;
pub mod codec;
pub mod error;
pub mod eval;
pub mod formats;
pub mod hash;
pub mod index;
pub mod synth;

pub use codec::{CodecConfig, ConfigParams, EncodeTrace, EncodedVector, Metric, QuerySketch};
pub use error::{ConfigError, Error, Result};
pub use index::{FlatIndex, ScoredHit};
