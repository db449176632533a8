//! Fixed-width packing of `b`-bit codes.
//!
//! Codes form a little-endian bit stream: code `k` occupies bit positions
//! `[k*b, (k+1)*b)`, bit `p` lives in byte `p / 8` at in-byte position
//! `p % 8`, and the least-significant bit of each code comes first. With
//! `b = 8` this is plain bytes; with `b = 4` the low nibble holds the even
//! code. Pad bits past `m*b` are always zero.

use crate::error::{Error, Result};

pub const MAX_BITS: u8 = 16;

/// Bytes needed for `m` codes of `b` bits.
#[inline]
pub const fn packed_len(m: usize, b: u8) -> usize {
    (m * b as usize).div_ceil(8)
}

/// Validated packed form of `m` codes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PackedCodes {
    bytes: Vec<u8>,
    m: usize,
    b: u8,
}

impl PackedCodes {
    /// Wraps existing bytes, rejecting a wrong length or nonzero pad bits.
    pub fn from_bytes(bytes: Vec<u8>, m: usize, b: u8) -> Result<Self> {
        check_layout(&bytes, m, b)?;
        Ok(Self { bytes, m, b })
    }

    pub fn bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    pub fn bits(&self) -> u8 {
        self.b
    }

    pub fn iter(&self) -> Codes<'_> {
        Codes::new(&self.bytes, self.m, self.b)
    }

    pub fn unpack(&self) -> Vec<u16> {
        self.iter().collect()
    }
}

fn check_bits(b: u8) -> Result<()> {
    if b == 0 || b > MAX_BITS {
        return Err(Error::InvalidBits(b));
    }
    Ok(())
}

fn check_layout(bytes: &[u8], m: usize, b: u8) -> Result<()> {
    check_bits(b)?;
    let expected = packed_len(m, b);
    if bytes.len() != expected {
        return Err(Error::PackedLength { expected, got: bytes.len(), m, b });
    }
    let used = (m * b as usize) % 8;
    if used != 0 {
        let last = bytes[expected - 1];
        if last >> used != 0 {
            return Err(Error::NonzeroPadBits);
        }
    }
    Ok(())
}

/// Packs `codes` at `b` bits each. Every code must be below `2^b`.
pub fn pack(codes: &[u16], b: u8) -> Result<PackedCodes> {
    check_bits(b)?;
    let max = (1u32 << b) - 1;
    if let Some(&bad) = codes.iter().find(|&&c| u32::from(c) > max) {
        return Err(Error::CodeOutOfRange { code: u32::from(bad), bits: b, max });
    }
    let mut bytes = vec![0u8; packed_len(codes.len(), b)];
    pack_into(codes, b, &mut bytes);
    Ok(PackedCodes { bytes, m: codes.len(), b })
}

/// Writes codes into a zeroed buffer of exactly `packed_len` bytes. Codes are
/// assumed in range.
pub(crate) fn pack_into(codes: &[u16], b: u8, out: &mut [u8]) {
    debug_assert_eq!(out.len(), packed_len(codes.len(), b));
    let mut acc: u32 = 0;
    let mut filled: u32 = 0;
    let mut pos = 0;
    for &code in codes {
        acc |= u32::from(code) << filled;
        filled += u32::from(b);
        while filled >= 8 {
            out[pos] = acc as u8;
            pos += 1;
            acc >>= 8;
            filled -= 8;
        }
    }
    if filled > 0 {
        out[pos] = acc as u8;
    }
}

/// Unpacks `m` codes of `b` bits, strictly checking length and pad bits.
pub fn unpack(bytes: &[u8], m: usize, b: u8) -> Result<Vec<u16>> {
    check_layout(bytes, m, b)?;
    Ok(Codes::new(bytes, m, b).collect())
}

/// Iterator over the codes of a packed buffer.
#[derive(Debug, Clone)]
pub struct Codes<'a> {
    bytes: &'a [u8],
    remaining: usize,
    b: u32,
    mask: u32,
    acc: u32,
    avail: u32,
    pos: usize,
}

impl<'a> Codes<'a> {
    /// The buffer must hold at least `packed_len(m, b)` bytes.
    pub fn new(bytes: &'a [u8], m: usize, b: u8) -> Self {
        assert!(bytes.len() >= packed_len(m, b), "buffer too short for {m} codes");
        Self {
            bytes,
            remaining: m,
            b: u32::from(b),
            mask: (1u32 << b) - 1,
            acc: 0,
            avail: 0,
            pos: 0,
        }
    }
}

impl Iterator for Codes<'_> {
    type Item = u16;

    #[inline]
    fn next(&mut self) -> Option<u16> {
        if self.remaining == 0 {
            return None;
        }
        while self.avail < self.b {
            self.acc |= u32::from(self.bytes[self.pos]) << self.avail;
            self.pos += 1;
            self.avail += 8;
        }
        let code = (self.acc & self.mask) as u16;
        self.acc >>= self.b;
        self.avail -= self.b;
        self.remaining -= 1;
        Some(code)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for Codes<'_> {}
