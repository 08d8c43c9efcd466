//! Minimal deterministic CBOR reader/writer.
//!
//! Only the subset needed by the PoTT wire formats is supported: unsigned
//! integers, negative integers, byte strings, text strings, arrays, maps and
//! the simple values `true`/`false`/`null`. Indefinite lengths are never
//! produced and always rejected.

use alloc::vec::Vec;
use core::fmt;

pub const MAJOR_UINT: u8 = 0;
pub const MAJOR_NINT: u8 = 1;
pub const MAJOR_BYTES: u8 = 2;
pub const MAJOR_TEXT: u8 = 3;
pub const MAJOR_ARRAY: u8 = 4;
pub const MAJOR_MAP: u8 = 5;
pub const MAJOR_SIMPLE: u8 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CborError {
    Truncated,
    /// Indefinite length, reserved additional info, or a non-shortest argument.
    NonCanonical,
    UnexpectedType { expected: u8, found: u8 },
    InvalidUtf8,
    TrailingBytes,
}

impl fmt::Display for CborError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CborError::Truncated => f.write_str("truncated CBOR input"),
            CborError::NonCanonical => f.write_str("non-canonical CBOR encoding"),
            CborError::UnexpectedType { expected, found } => {
                write!(f, "expected CBOR major type {expected}, found {found}")
            }
            CborError::InvalidUtf8 => f.write_str("text string is not valid UTF-8"),
            CborError::TrailingBytes => f.write_str("trailing bytes after CBOR item"),
        }
    }
}

/// Item head as it appeared on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Head {
    pub major: u8,
    /// Low five bits of the initial byte.
    pub info: u8,
    pub arg: u64,
}

impl Head {
    /// True when `arg` used the shortest possible argument width.
    pub fn is_shortest(&self) -> bool {
        match self.info {
            0..=23 => true,
            24 => self.arg >= 24,
            25 => self.arg > 0xff,
            26 => self.arg > 0xffff,
            27 => self.arg > 0xffff_ffff,
            _ => false,
        }
    }
}

#[derive(Debug, Default, Clone)]
pub struct Encoder {
    buf: Vec<u8>,
}

impl Encoder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(cap: usize) -> Self {
        Encoder { buf: Vec::with_capacity(cap) }
    }

    pub fn into_bytes(self) -> Vec<u8> {
        self.buf
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.buf
    }

    /// Writes a head with the shortest argument encoding.
    pub fn head(&mut self, major: u8, arg: u64) -> &mut Self {
        let mt = major << 5;
        if arg < 24 {
            self.buf.push(mt | arg as u8);
        } else if arg <= 0xff {
            self.buf.push(mt | 24);
            self.buf.push(arg as u8);
        } else if arg <= 0xffff {
            self.buf.push(mt | 25);
            self.buf.extend_from_slice(&(arg as u16).to_be_bytes());
        } else if arg <= 0xffff_ffff {
            self.buf.push(mt | 26);
            self.buf.extend_from_slice(&(arg as u32).to_be_bytes());
        } else {
            self.buf.push(mt | 27);
            self.buf.extend_from_slice(&arg.to_be_bytes());
        }
        self
    }

    pub fn uint(&mut self, v: u64) -> &mut Self {
        self.head(MAJOR_UINT, v)
    }

    pub fn int(&mut self, v: i64) -> &mut Self {
        if v >= 0 {
            self.head(MAJOR_UINT, v as u64)
        } else {
            self.head(MAJOR_NINT, !(v as u64))
        }
    }

    /// Unsigned integer with a fixed 8-byte argument (`0x1B`).
    pub fn uint_fixed64(&mut self, v: u64) -> &mut Self {
        self.buf.push(0x1b);
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    /// Unsigned integer with a fixed 4-byte argument (`0x1A`).
    pub fn uint_fixed32(&mut self, v: u32) -> &mut Self {
        self.buf.push(0x1a);
        self.buf.extend_from_slice(&v.to_be_bytes());
        self
    }

    pub fn bytes(&mut self, b: &[u8]) -> &mut Self {
        self.head(MAJOR_BYTES, b.len() as u64);
        self.buf.extend_from_slice(b);
        self
    }

    pub fn text(&mut self, s: &str) -> &mut Self {
        self.head(MAJOR_TEXT, s.len() as u64);
        self.buf.extend_from_slice(s.as_bytes());
        self
    }

    pub fn array(&mut self, len: usize) -> &mut Self {
        self.head(MAJOR_ARRAY, len as u64)
    }

    pub fn map(&mut self, len: usize) -> &mut Self {
        self.head(MAJOR_MAP, len as u64)
    }

    pub fn bool(&mut self, v: bool) -> &mut Self {
        self.buf.push(if v { 0xf5 } else { 0xf4 });
        self
    }

    pub fn null(&mut self) -> &mut Self {
        self.buf.push(0xf6);
        self
    }

    /// Appends an already-encoded item verbatim.
    pub fn raw(&mut self, item: &[u8]) -> &mut Self {
        self.buf.extend_from_slice(item);
        self
    }
}

#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Decoder<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Decoder { buf, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn is_empty(&self) -> bool {
        self.pos >= self.buf.len()
    }

    pub fn finish(&self) -> Result<(), CborError> {
        if self.is_empty() {
            Ok(())
        } else {
            Err(CborError::TrailingBytes)
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], CborError> {
        let end = self.pos.checked_add(n).ok_or(CborError::Truncated)?;
        if end > self.buf.len() {
            return Err(CborError::Truncated);
        }
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn peek_byte(&self) -> Option<u8> {
        self.buf.get(self.pos).copied()
    }

    /// Reads a head without enforcing shortest form. Indefinite lengths and
    /// reserved additional-info values are still rejected.
    pub fn raw_head(&mut self) -> Result<Head, CborError> {
        let ib = self.take(1)?[0];
        let major = ib >> 5;
        let info = ib & 0x1f;
        let arg = match info {
            0..=23 => info as u64,
            24 => self.take(1)?[0] as u64,
            25 => u16::from_be_bytes(self.take(2)?.try_into().unwrap()) as u64,
            26 => u32::from_be_bytes(self.take(4)?.try_into().unwrap()) as u64,
            27 => u64::from_be_bytes(self.take(8)?.try_into().unwrap()),
            _ => return Err(CborError::NonCanonical),
        };
        Ok(Head { major, info, arg })
    }

    /// Reads a head and requires the shortest argument encoding.
    pub fn head(&mut self) -> Result<Head, CborError> {
        let h = self.raw_head()?;
        if !h.is_shortest() {
            return Err(CborError::NonCanonical);
        }
        Ok(h)
    }

    fn expect(&mut self, major: u8) -> Result<u64, CborError> {
        let h = self.head()?;
        if h.major != major {
            return Err(CborError::UnexpectedType { expected: major, found: h.major });
        }
        Ok(h.arg)
    }

    pub fn uint(&mut self) -> Result<u64, CborError> {
        self.expect(MAJOR_UINT)
    }

    pub fn int(&mut self) -> Result<i64, CborError> {
        let h = self.head()?;
        match h.major {
            MAJOR_UINT if h.arg <= i64::MAX as u64 => Ok(h.arg as i64),
            MAJOR_NINT if h.arg <= i64::MAX as u64 => Ok(!(h.arg as i64)),
            MAJOR_UINT | MAJOR_NINT => Err(CborError::NonCanonical),
            found => Err(CborError::UnexpectedType { expected: MAJOR_UINT, found }),
        }
    }

    pub fn uint_fixed64(&mut self) -> Result<u64, CborError> {
        let h = self.raw_head()?;
        if h.major != MAJOR_UINT {
            return Err(CborError::UnexpectedType { expected: MAJOR_UINT, found: h.major });
        }
        if h.info != 27 {
            return Err(CborError::NonCanonical);
        }
        Ok(h.arg)
    }

    pub fn uint_fixed32(&mut self) -> Result<u32, CborError> {
        let h = self.raw_head()?;
        if h.major != MAJOR_UINT {
            return Err(CborError::UnexpectedType { expected: MAJOR_UINT, found: h.major });
        }
        if h.info != 26 {
            return Err(CborError::NonCanonical);
        }
        Ok(h.arg as u32)
    }

    pub fn bytes(&mut self) -> Result<&'a [u8], CborError> {
        let len = self.expect(MAJOR_BYTES)?;
        self.take(usize::try_from(len).map_err(|_| CborError::Truncated)?)
    }

    pub fn text(&mut self) -> Result<&'a str, CborError> {
        let len = self.expect(MAJOR_TEXT)?;
        let raw = self.take(usize::try_from(len).map_err(|_| CborError::Truncated)?)?;
        core::str::from_utf8(raw).map_err(|_| CborError::InvalidUtf8)
    }

    pub fn array(&mut self) -> Result<u64, CborError> {
        self.expect(MAJOR_ARRAY)
    }

    pub fn map(&mut self) -> Result<u64, CborError> {
        self.expect(MAJOR_MAP)
    }

    pub fn bool(&mut self) -> Result<bool, CborError> {
        match self.take(1)?[0] {
            0xf4 => Ok(false),
            0xf5 => Ok(true),
            b => Err(CborError::UnexpectedType { expected: MAJOR_SIMPLE, found: b >> 5 }),
        }
    }

    /// Consumes `null` if it is next; returns whether it did.
    pub fn null(&mut self) -> Result<bool, CborError> {
        if self.peek_byte() == Some(0xf6) {
            self.pos += 1;
            Ok(true)
        } else {
            Ok(false)
        }
    }

    /// Returns the raw bytes of the next complete item.
    pub fn item_bytes(&mut self) -> Result<&'a [u8], CborError> {
        let start = self.pos;
        self.skip(0)?;
        Ok(&self.buf[start..self.pos])
    }

    fn skip(&mut self, depth: usize) -> Result<(), CborError> {
        if depth > 64 {
            return Err(CborError::NonCanonical);
        }
        let h = self.head()?;
        match h.major {
            MAJOR_UINT | MAJOR_NINT => Ok(()),
            MAJOR_BYTES | MAJOR_TEXT => {
                self.take(usize::try_from(h.arg).map_err(|_| CborError::Truncated)?)?;
                Ok(())
            }
            MAJOR_ARRAY => {
                for _ in 0..h.arg {
                    self.skip(depth + 1)?;
                }
                Ok(())
            }
            MAJOR_MAP => {
                for _ in 0..h.arg {
                    self.skip(depth + 1)?;
                    self.skip(depth + 1)?;
                }
                Ok(())
            }
            MAJOR_SIMPLE if h.info < 24 => Ok(()),
            _ => Err(CborError::NonCanonical),
        }
    }
}
