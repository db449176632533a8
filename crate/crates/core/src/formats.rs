//! On-disk formats. All multi-byte fields are little-endian.
//!
//! Sketch file (`CHSK`, version 1), 60-byte header:
//!
//! | offset | size | field            |
//! |-------:|-----:|------------------|
//! | 0      | 4    | magic `CHSK`     |
//! | 4      | 2    | version (1)      |
//! | 6      | 1    | metric (0 cosine, 1 dot) |
//! | 7      | 1    | bits `b`         |
//! | 8      | 4    | `d`              |
//! | 12     | 4    | `m`              |
//! | 16     | 4    | `s`              |
//! | 20     | 8    | seed             |
//! | 28     | 8    | clip `c` (f64)   |
//! | 36     | 8    | `l_min` (f64)    |
//! | 44     | 8    | `l_max` (f64)    |
//! | 52     | 8    | record count     |
//!
//! followed by `count` records of an 8-byte id and `code_size_bytes` of
//! payload (packed codes, then the 2-byte norm code in dot mode).
//!
//! Embedding file (`CHEV`, version 1), 18-byte header: magic, u16 version,
//! u32 `d`, u64 count; then per vector an 8-byte id and `d` f32 values.
//!
//! Pairs file: UTF-8 text, one `subset<TAB>left_id<TAB>right_id<TAB>label`
//! per line; lines starting with `#` and blank lines are skipped.

use std::io::{self, BufRead, Read, Write};

use thiserror::Error;

use crate::codec::{CodecConfig, ConfigParams, EncodedVector, Metric};
use crate::error::{ConfigError, Error as CodecError};
use crate::eval::LabeledPair;
use crate::index::FlatIndex;

pub const SKETCH_MAGIC: [u8; 4] = *b"CHSK";
pub const EMBEDDING_MAGIC: [u8; 4] = *b"CHEV";
pub const FORMAT_VERSION: u16 = 1;
pub const SKETCH_HEADER_LEN: usize = 60;
pub const EMBEDDING_HEADER_LEN: usize = 18;

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("not a sketch file (bad magic {0:?})")]
    NotASketchFile([u8; 4]),
    #[error("not an embedding file (bad magic {0:?})")]
    NotAnEmbeddingFile([u8; 4]),
    #[error("unsupported version {0}")]
    UnsupportedVersion(u16),
    #[error("unknown metric code {0}")]
    UnknownMetric(u8),
    #[error("invalid header config: {0}")]
    InvalidConfig(#[from] ConfigError),
    #[error("truncated file at byte {offset}: {what}")]
    Truncated { offset: u64, what: String },
    #[error("trailing data after {count} records at byte {offset}")]
    TrailingData { count: u64, offset: u64 },
    #[error("nonzero pad bits in record {record} (id {id}) at byte {offset}")]
    NonzeroPadBits { record: u64, id: u64, offset: u64 },
    #[error("record {record} (id {id}) at byte {offset}: {source}")]
    Record { record: u64, id: u64, offset: u64, source: CodecError },
    #[error("dimension {got} does not match expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("line {line}: {message}")]
    Pairs { line: usize, message: String },
}

/// Reader that tracks its byte offset for error reporting.
struct Cursor<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Cursor<R> {
    fn new(inner: R) -> Self {
        Self { inner, offset: 0 }
    }

    fn fill(&mut self, buf: &mut [u8], what: &str) -> Result<(), FormatError> {
        match self.inner.read_exact(buf) {
            Ok(()) => {
                self.offset += buf.len() as u64;
                Ok(())
            }
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => {
                Err(FormatError::Truncated { offset: self.offset, what: what.to_string() })
            }
            Err(e) => Err(e.into()),
        }
    }

    fn array<const N: usize>(&mut self, what: &str) -> Result<[u8; N], FormatError> {
        let mut b = [0u8; N];
        self.fill(&mut b, what)?;
        Ok(b)
    }

    fn at_eof(&mut self) -> Result<bool, FormatError> {
        let mut b = [0u8; 1];
        loop {
            match self.inner.read(&mut b) {
                Ok(0) => return Ok(true),
                Ok(_) => return Ok(false),
                Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
                Err(e) => return Err(e.into()),
            }
        }
    }
}

pub fn encode_sketch_header(config: &CodecConfig, count: u64) -> [u8; SKETCH_HEADER_LEN] {
    let mut h = [0u8; SKETCH_HEADER_LEN];
    h[0..4].copy_from_slice(&SKETCH_MAGIC);
    h[4..6].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
    h[6] = config.metric().code();
    h[7] = config.bits();
    h[8..12].copy_from_slice(&(config.dim() as u32).to_le_bytes());
    h[12..16].copy_from_slice(&(config.sketch_dim() as u32).to_le_bytes());
    h[16..20].copy_from_slice(&config.sparsity().to_le_bytes());
    h[20..28].copy_from_slice(&config.seed().to_le_bytes());
    h[28..36].copy_from_slice(&config.clip().to_le_bytes());
    h[36..44].copy_from_slice(&config.l_min().to_le_bytes());
    h[44..52].copy_from_slice(&config.l_max().to_le_bytes());
    h[52..60].copy_from_slice(&count.to_le_bytes());
    h
}

/// Parses a sketch header into its config and record count.
pub fn decode_sketch_header(h: &[u8; SKETCH_HEADER_LEN]) -> Result<(CodecConfig, u64), FormatError> {
    let magic: [u8; 4] = h[0..4].try_into().unwrap();
    if magic != SKETCH_MAGIC {
        return Err(FormatError::NotASketchFile(magic));
    }
    let version = u16::from_le_bytes([h[4], h[5]]);
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let metric = Metric::from_code(h[6]).ok_or(FormatError::UnknownMetric(h[6]))?;
    let u32_at = |o: usize| u32::from_le_bytes(h[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(h[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(h[o..o + 8].try_into().unwrap());
    let params = ConfigParams {
        d: u64::from(u32_at(8)),
        m: u64::from(u32_at(12)),
        b: u64::from(h[7]),
        s: u64::from(u32_at(16)),
        c: f64_at(28),
        metric,
        seed: u64_at(20),
        l_min: f64_at(36),
        l_max: f64_at(44),
    };
    Ok((params.validate()?, u64_at(52)))
}

pub fn write_sketch_file<W: Write>(mut w: W, index: &FlatIndex) -> io::Result<()> {
    let config = index.config();
    w.write_all(&encode_sketch_header(config, index.len() as u64))?;
    let mut buf = Vec::with_capacity(8 + config.code_size_bytes());
    for (id, e) in index.iter() {
        buf.clear();
        buf.extend_from_slice(&id.to_le_bytes());
        e.write_payload(&mut buf);
        w.write_all(&buf)?;
    }
    w.flush()
}

/// Reads a whole sketch file. Any defect fails the read; no partial index is
/// returned.
pub fn read_sketch_file<R: Read>(r: R) -> Result<FlatIndex, FormatError> {
    let mut cur = Cursor::new(r);
    let header: [u8; SKETCH_HEADER_LEN] = cur.array("sketch header")?;
    let (config, count) = decode_sketch_header(&header)?;
    let packed_len = config.packed_len();
    let mut index = FlatIndex::new(config);
    let mut packed = vec![0u8; packed_len];
    for record in 0..count {
        let offset = cur.offset;
        let id = u64::from_le_bytes(cur.array(&format!("id of record {record}"))?);
        cur.fill(&mut packed, &format!("codes of record {record} (id {id})"))?;
        let norm_code = match config.metric() {
            Metric::Cosine => None,
            Metric::Dot => Some(u16::from_le_bytes(cur.array(&format!("norm of record {record} (id {id})"))?)),
        };
        let encoded = EncodedVector::from_parts(&config, packed.clone(), norm_code).map_err(|source| match source {
            CodecError::NonzeroPadBits => FormatError::NonzeroPadBits { record, id, offset },
            source => FormatError::Record { record, id, offset, source },
        })?;
        index
            .add_encoded(id, encoded)
            .map_err(|source| FormatError::Record { record, id, offset, source })?;
    }
    if !cur.at_eof()? {
        return Err(FormatError::TrailingData { count, offset: cur.offset });
    }
    Ok(index)
}

/// One vector of an embedding file.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingRecord {
    pub id: u64,
    pub values: Vec<f32>,
}

pub fn write_embedding_file<W: Write>(mut w: W, d: usize, records: &[EmbeddingRecord]) -> Result<(), FormatError> {
    let mut header = [0u8; EMBEDDING_HEADER_LEN];
    header[0..4].copy_from_slice(&EMBEDDING_MAGIC);
    header[4..6].copy_from_slice(&FORMAT_VERSION.to_le_bytes());
    let d32 = u32::try_from(d).map_err(|_| FormatError::DimensionMismatch { expected: u32::MAX as usize, got: d })?;
    header[6..10].copy_from_slice(&d32.to_le_bytes());
    header[10..18].copy_from_slice(&(records.len() as u64).to_le_bytes());
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(8 + 4 * d);
    for rec in records {
        if rec.values.len() != d {
            return Err(FormatError::DimensionMismatch { expected: d, got: rec.values.len() });
        }
        buf.clear();
        buf.extend_from_slice(&rec.id.to_le_bytes());
        for v in &rec.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads an embedding file, returning `d` and the records in file order.
pub fn read_embedding_file<R: Read>(r: R) -> Result<(usize, Vec<EmbeddingRecord>), FormatError> {
    let mut cur = Cursor::new(r);
    let magic: [u8; 4] = cur.array("embedding header")?;
    if magic != EMBEDDING_MAGIC {
        return Err(FormatError::NotAnEmbeddingFile(magic));
    }
    let version = u16::from_le_bytes(cur.array("embedding header")?);
    if version != FORMAT_VERSION {
        return Err(FormatError::UnsupportedVersion(version));
    }
    let d = u32::from_le_bytes(cur.array("embedding header")?) as usize;
    let count = u64::from_le_bytes(cur.array("embedding header")?);
    let mut records = Vec::new();
    let mut raw = vec![0u8; 4 * d];
    for record in 0..count {
        let id = u64::from_le_bytes(cur.array(&format!("id of record {record}"))?);
        cur.fill(&mut raw, &format!("values of record {record} (id {id})"))?;
        let values = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
        records.push(EmbeddingRecord { id, values });
    }
    if !cur.at_eof()? {
        return Err(FormatError::TrailingData { count, offset: cur.offset });
    }
    Ok((d, records))
}

pub fn read_pairs<R: BufRead>(r: R) -> Result<Vec<LabeledPair>, FormatError> {
    let mut pairs = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| FormatError::Pairs { line: line_no, message };
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 4 {
            return Err(err(format!("expected 4 tab-separated fields, found {}", fields.len())));
        }
        let left_id = fields[1].trim().parse::<u64>().map_err(|e| err(format!("left id '{}': {e}", fields[1])))?;
        let right_id = fields[2].trim().parse::<u64>().map_err(|e| err(format!("right id '{}': {e}", fields[2])))?;
        let label = fields[3].trim().parse::<f64>().map_err(|e| err(format!("label '{}': {e}", fields[3])))?;
        if !label.is_finite() {
            return Err(err(format!("label '{}' is not finite", fields[3])));
        }
        pairs.push(LabeledPair { subset: fields[0].to_string(), left_id, right_id, label });
    }
    Ok(pairs)
}

pub fn write_pairs<W: Write>(mut w: W, pairs: &[LabeledPair]) -> io::Result<()> {
    writeln!(w, "# subset\tleft_id\tright_id\tlabel")?;
    for p in pairs {
        writeln!(w, "{}\t{}\t{}\t{}", p.subset, p.left_id, p.right_id, p.label)?;
    }
    w.flush()
}
