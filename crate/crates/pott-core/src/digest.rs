//! Payload digests and the hash primitives shared across the crate.

use core::fmt;
use sha2::{Digest, Sha256};

/// Which canonical identifier a payload digest was computed with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DigestKind {
    BitcoinTx,
    BitcoinHeader,
    Bip157Filter,
    Generic,
}

impl DigestKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DigestKind::BitcoinTx => "bitcoin-tx",
            DigestKind::BitcoinHeader => "bitcoin-header",
            DigestKind::Bip157Filter => "bip157-filter",
            DigestKind::Generic => "generic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "bitcoin-tx" => DigestKind::BitcoinTx,
            "bitcoin-header" => DigestKind::BitcoinHeader,
            "bip157-filter" => DigestKind::Bip157Filter,
            "generic" => DigestKind::Generic,
            _ => return None,
        })
    }
}

/// 32-byte payload hash `h` as carried on the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct PayloadHash(pub [u8; 32]);

/// A payload hash together with the rule that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PayloadDigest {
    pub kind: DigestKind,
    pub hash: PayloadHash,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DigestError {
    /// Filter bytes do not start with a canonical CompactSize element count,
    /// or the GCS body is inconsistent with that count.
    MalformedFilter,
    /// Block headers are exactly 80 bytes.
    HeaderLength(usize),
}

impl fmt::Display for DigestError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigestError::MalformedFilter => f.write_str("malformed BIP158 filter encoding"),
            DigestError::HeaderLength(n) => write!(f, "block header must be 80 bytes, got {n}"),
        }
    }
}

pub fn sha256(data: &[u8]) -> [u8; 32] {
    Sha256::digest(data).into()
}

pub fn double_sha256(data: &[u8]) -> [u8; 32] {
    sha256(&sha256(data))
}

/// Hashes `payload_bytes` with the canonical identifier rule for `kind`.
///
/// Bitcoin transactions and headers use double-SHA-256 (txid / block hash in
/// internal byte order). Compact filters use the BIP157 filter hash, which is
/// double-SHA-256 over the serialized BIP158 filter. Everything else is a
/// single SHA-256 of the canonical bytes.
pub fn compute_payload_digest(
    payload_bytes: &[u8],
    kind: DigestKind,
) -> Result<PayloadDigest, DigestError> {
    let hash = match kind {
        DigestKind::BitcoinTx => double_sha256(payload_bytes),
        DigestKind::BitcoinHeader => {
            if payload_bytes.len() != 80 {
                return Err(DigestError::HeaderLength(payload_bytes.len()));
            }
            double_sha256(payload_bytes)
        }
        DigestKind::Bip157Filter => {
            validate_filter(payload_bytes)?;
            double_sha256(payload_bytes)
        }
        DigestKind::Generic => sha256(payload_bytes),
    };
    Ok(PayloadDigest { kind, hash: PayloadHash(hash) })
}

/// Reads a Bitcoin CompactSize, rejecting non-minimal encodings.
pub(crate) fn read_compact_size(bytes: &[u8]) -> Option<(u64, usize)> {
    let first = *bytes.first()?;
    let (value, used, min) = match first {
        0..=0xfc => return Some((first as u64, 1)),
        0xfd => (u16::from_le_bytes(bytes.get(1..3)?.try_into().ok()?) as u64, 3, 0xfd),
        0xfe => (u32::from_le_bytes(bytes.get(1..5)?.try_into().ok()?) as u64, 5, 0x1_0000),
        0xff => (u64::from_le_bytes(bytes.get(1..9)?.try_into().ok()?), 9, 0x1_0000_0000),
    };
    if value < min {
        return None;
    }
    Some((value, used))
}

fn validate_filter(bytes: &[u8]) -> Result<(), DigestError> {
    let (n, used) = read_compact_size(bytes).ok_or(DigestError::MalformedFilter)?;
    let body = &bytes[used..];
    match (n, body.is_empty()) {
        (0, true) => Ok(()),
        (0, false) | (_, true) => Err(DigestError::MalformedFilter),
        // Each element needs at least P + 1 = 20 bits of Golomb-Rice code.
        (n, false) if (body.len() as u128) * 8 < (n as u128) * 20 => {
            Err(DigestError::MalformedFilter)
        }
        _ => Ok(()),
    }
}
