//! Receipts, receipt chains, and their canonical CBOR wire form.
//!
//! A receipt is a CBOR map with integer keys:
//!
//! | key | field      | encoding                         |
//! |-----|------------|----------------------------------|
//! | 0   | `h`        | bstr(32)                         |
//! | 1   | `nu`       | bstr(16)                         |
//! | 2   | `node`     | bstr(32), BIP-340 x-only key     |
//! | 3   | `t_in`     | uint, always 8-byte arg (`0x1B`) |
//! | 4   | `t_out`    | uint, always 8-byte arg (`0x1B`) |
//! | 5   | `prev`     | bstr(32)                         |
//! | 6   | `sig`      | bstr(64)                         |
//! | 7   | `tin_frac` | uint, always 4-byte arg (`0x1A`) |
//! | 8   | `tout_frac`| uint, always 4-byte arg (`0x1A`) |
//!
//! Keys 7 and 8 appear together or not at all. Everything else about the
//! encoding is deterministic CBOR: definite lengths, ascending keys, shortest
//! heads. The signature covers the map with key 6 removed, and the same bytes
//! are hashed to produce the next hop's `prev`.

use alloc::vec::Vec;
use core::fmt;

use rand_core::RngCore;

use crate::cbor::{CborError, Decoder, Encoder};
use crate::digest::{sha256, PayloadDigest, PayloadHash};
use crate::signing::{sign_receipt, NodeId, RelayKeypair, SigningError};
use crate::timebase::TaiTimestamp;

/// `prev` value of the origin receipt.
pub const ZERO_PREV: [u8; 32] = [0u8; 32];

/// Encoded size of a receipt without fractional timestamps.
pub const RECEIPT_LEN: usize = 211;
/// Extra bytes when both fractional timestamp fields are carried.
pub const FRAC_EXTRA_LEN: usize = 12;

/// Per-payload-instance nonce minted by the originator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Nonce(pub [u8; 16]);

impl Nonce {
    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        let mut b = [0u8; 16];
        rng.fill_bytes(&mut b);
        Nonce(b)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Receipt {
    pub h: PayloadHash,
    pub nu: Nonce,
    pub node: NodeId,
    pub t_in: TaiTimestamp,
    pub t_out: TaiTimestamp,
    pub prev: [u8; 32],
    pub sig: [u8; 64],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DecodeError {
    /// Indefinite lengths, out-of-order or duplicate keys, padded heads,
    /// wrong timestamp argument width, or trailing bytes.
    NonCanonicalEncoding,
    UnknownKey(u64),
    WrongLength { key: u8, expected: usize, found: usize },
    WrongType { key: u8 },
    MissingKey(u8),
    Truncated,
}

impl fmt::Display for DecodeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DecodeError::NonCanonicalEncoding => f.write_str("non-canonical encoding"),
            DecodeError::UnknownKey(k) => write!(f, "unknown key {k}"),
            DecodeError::WrongLength { key, expected, found } => {
                write!(f, "key {key}: expected {expected} bytes, found {found}")
            }
            DecodeError::WrongType { key } => write!(f, "key {key}: wrong value type"),
            DecodeError::MissingKey(k) => write!(f, "missing key {k}"),
            DecodeError::Truncated => f.write_str("truncated input"),
        }
    }
}

impl From<CborError> for DecodeError {
    fn from(e: CborError) -> Self {
        match e {
            CborError::Truncated => DecodeError::Truncated,
            _ => DecodeError::NonCanonicalEncoding,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainError {
    /// `t_in` is after `t_out` on a single hop.
    Clock,
    /// A hop's `t_in` does not strictly follow the previous hop's `t_out`.
    Monotonicity,
    EmptyChain,
    Signing(SigningError),
}

impl fmt::Display for ChainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ChainError::Clock => f.write_str("t_in is later than t_out"),
            ChainError::Monotonicity => {
                f.write_str("t_in must be strictly after the previous hop's t_out")
            }
            ChainError::EmptyChain => f.write_str("chain is empty"),
            ChainError::Signing(e) => write!(f, "signing: {e}"),
        }
    }
}

impl From<SigningError> for ChainError {
    fn from(e: SigningError) -> Self {
        ChainError::Signing(e)
    }
}

impl Receipt {
    /// Builds and signs a receipt for `key`.
    pub fn new_signed(
        h: PayloadHash,
        nu: Nonce,
        key: &RelayKeypair,
        t_in: TaiTimestamp,
        t_out: TaiTimestamp,
        prev: [u8; 32],
        aux_rand: &[u8; 32],
    ) -> Result<Self, ChainError> {
        if t_in.is_after(&t_out) {
            return Err(ChainError::Clock);
        }
        let mut r = Receipt { h, nu, node: key.public(), t_in, t_out, prev, sig: [0u8; 64] };
        r.sig = sign_receipt(&r.signing_message(), key, aux_rand)?;
        Ok(r)
    }

    fn has_frac(&self) -> bool {
        self.t_in.frac.is_some() || self.t_out.frac.is_some()
    }

    fn write_fields(&self, e: &mut Encoder, with_sig: bool) {
        let frac = self.has_frac();
        let entries = 6 + usize::from(with_sig) + if frac { 2 } else { 0 };
        e.map(entries);
        e.uint(0).bytes(&self.h.0);
        e.uint(1).bytes(&self.nu.0);
        e.uint(2).bytes(&self.node.0);
        e.uint(3).uint_fixed64(self.t_in.seconds);
        e.uint(4).uint_fixed64(self.t_out.seconds);
        e.uint(5).bytes(&self.prev);
        if with_sig {
            e.uint(6).bytes(&self.sig);
        }
        if frac {
            e.uint(7).uint_fixed32(self.t_in.frac.unwrap_or(0));
            e.uint(8).uint_fixed32(self.t_out.frac.unwrap_or(0));
        }
    }

    /// Canonical wire encoding (keys 0-6, plus 7-8 when fractions are set).
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Encoder::with_capacity(RECEIPT_LEN + FRAC_EXTRA_LEN);
        self.write_fields(&mut e, true);
        e.into_bytes()
    }

    /// The receipt encoded without its signature: the bytes covered by `sig`
    /// and hashed into the next hop's `prev`.
    pub fn signing_message(&self) -> Vec<u8> {
        let mut e = Encoder::with_capacity(RECEIPT_LEN);
        self.write_fields(&mut e, false);
        e.into_bytes()
    }

    /// SHA-256 of [`Receipt::signing_message`].
    pub fn link_hash(&self) -> [u8; 32] {
        sha256(&self.signing_message())
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Decoder::new(bytes);
        let r = Self::decode_from(&mut d)?;
        d.finish()?;
        Ok(r)
    }

    pub(crate) fn decode_from(d: &mut Decoder<'_>) -> Result<Self, DecodeError> {
        let entries = d.map().map_err(|e| match e {
            CborError::UnexpectedType { .. } => DecodeError::NonCanonicalEncoding,
            other => other.into(),
        })?;

        let mut h = None;
        let mut nu = None;
        let mut node = None;
        let mut t_in = None;
        let mut t_out = None;
        let mut prev = None;
        let mut sig = None;
        let mut tin_frac = None;
        let mut tout_frac = None;
        let mut last_key: Option<u64> = None;

        for _ in 0..entries {
            let key = match d.uint() {
                Ok(k) => k,
                Err(CborError::UnexpectedType { .. }) => {
                    return Err(DecodeError::NonCanonicalEncoding)
                }
                Err(e) => return Err(e.into()),
            };
            if key > 8 || (key >= 7 && entries != 9) {
                return Err(DecodeError::UnknownKey(key));
            }
            if last_key.is_some_and(|l| key <= l) {
                return Err(DecodeError::NonCanonicalEncoding);
            }
            last_key = Some(key);
            let k = key as u8;
            match k {
                0 => h = Some(fixed_bytes::<32>(d, k)?),
                1 => nu = Some(fixed_bytes::<16>(d, k)?),
                2 => node = Some(fixed_bytes::<32>(d, k)?),
                3 => t_in = Some(d.uint_fixed64().map_err(|e| value_err(e, k))?),
                4 => t_out = Some(d.uint_fixed64().map_err(|e| value_err(e, k))?),
                5 => prev = Some(fixed_bytes::<32>(d, k)?),
                6 => sig = Some(fixed_bytes::<64>(d, k)?),
                7 => tin_frac = Some(d.uint_fixed32().map_err(|e| value_err(e, k))?),
                _ => tout_frac = Some(d.uint_fixed32().map_err(|e| value_err(e, k))?),
            }
        }

        Ok(Receipt {
            h: PayloadHash(h.ok_or(DecodeError::MissingKey(0))?),
            nu: Nonce(nu.ok_or(DecodeError::MissingKey(1))?),
            node: NodeId(node.ok_or(DecodeError::MissingKey(2))?),
            t_in: TaiTimestamp {
                seconds: t_in.ok_or(DecodeError::MissingKey(3))?,
                frac: tin_frac,
            },
            t_out: TaiTimestamp {
                seconds: t_out.ok_or(DecodeError::MissingKey(4))?,
                frac: tout_frac,
            },
            prev: prev.ok_or(DecodeError::MissingKey(5))?,
            sig: sig.ok_or(DecodeError::MissingKey(6))?,
        })
        .and_then(|r| {
            // A 9-entry map with keys 0..=8 has both fractions; anything that
            // got here with only one would have failed the key checks above.
            if r.t_in.frac.is_some() != r.t_out.frac.is_some() {
                Err(DecodeError::MissingKey(if r.t_in.frac.is_some() { 8 } else { 7 }))
            } else {
                Ok(r)
            }
        })
    }
}

fn value_err(e: CborError, key: u8) -> DecodeError {
    match e {
        CborError::UnexpectedType { .. } => DecodeError::WrongType { key },
        other => other.into(),
    }
}

fn fixed_bytes<const N: usize>(d: &mut Decoder<'_>, key: u8) -> Result<[u8; N], DecodeError> {
    let b = d.bytes().map_err(|e| value_err(e, key))?;
    b.try_into()
        .map_err(|_| DecodeError::WrongLength { key, expected: N, found: b.len() })
}

pub fn encode_receipt(r: &Receipt) -> Vec<u8> {
    r.encode()
}

pub fn decode_receipt(bytes: &[u8]) -> Result<Receipt, DecodeError> {
    Receipt::decode(bytes)
}

pub fn signing_message(r: &Receipt) -> Vec<u8> {
    r.signing_message()
}

pub fn link_hash(r: &Receipt) -> [u8; 32] {
    r.link_hash()
}

/// An ordered custody chain; index 0 is the originator's receipt.
///
/// Chains are values: appending returns a new chain. Decoding does not
/// validate linkage; that is the verifier's job.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct ReceiptChain {
    receipts: Vec<Receipt>,
}

impl ReceiptChain {
    /// Wraps receipts as-is, without any checks.
    pub fn from_receipts(receipts: Vec<Receipt>) -> Self {
        ReceiptChain { receipts }
    }

    pub fn receipts(&self) -> &[Receipt] {
        &self.receipts
    }

    pub fn into_receipts(self) -> Vec<Receipt> {
        self.receipts
    }

    pub fn len(&self) -> usize {
        self.receipts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.receipts.is_empty()
    }

    pub fn last(&self) -> Option<&Receipt> {
        self.receipts.last()
    }

    /// Starts a chain with a caller-chosen nonce.
    pub fn originate_with_nonce(
        h: PayloadHash,
        nu: Nonce,
        key: &RelayKeypair,
        t_in: TaiTimestamp,
        t_out: TaiTimestamp,
        aux_rand: &[u8; 32],
    ) -> Result<Self, ChainError> {
        let r = Receipt::new_signed(h, nu, key, t_in, t_out, ZERO_PREV, aux_rand)?;
        Ok(ReceiptChain { receipts: alloc::vec![r] })
    }

    pub fn append_hop(
        &self,
        key: &RelayKeypair,
        t_in: TaiTimestamp,
        t_out: TaiTimestamp,
    ) -> Result<Self, ChainError> {
        self.append_hop_with_aux(key, t_in, t_out, &[0u8; 32])
    }

    pub fn append_hop_with_aux(
        &self,
        key: &RelayKeypair,
        t_in: TaiTimestamp,
        t_out: TaiTimestamp,
        aux_rand: &[u8; 32],
    ) -> Result<Self, ChainError> {
        let last = self.receipts.last().ok_or(ChainError::EmptyChain)?;
        if !t_in.is_after(&last.t_out) {
            return Err(ChainError::Monotonicity);
        }
        let r = Receipt::new_signed(last.h, last.nu, key, t_in, t_out, last.link_hash(), aux_rand)?;
        let mut receipts = self.receipts.clone();
        receipts.push(r);
        Ok(ReceiptChain { receipts })
    }

    /// Sum of the canonical receipt encodings.
    pub fn receipts_encoded_len(&self) -> usize {
        self.receipts.iter().map(|r| r.encode().len()).sum()
    }

    /// `.pottc` form: a CBOR array of receipt maps.
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Encoder::with_capacity(self.receipts.len() * RECEIPT_LEN + 3);
        e.array(self.receipts.len());
        for r in &self.receipts {
            r.write_fields(&mut e, true);
        }
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, DecodeError> {
        let mut d = Decoder::new(bytes);
        let n = d.array().map_err(|e| match e {
            CborError::UnexpectedType { .. } => DecodeError::NonCanonicalEncoding,
            other => other.into(),
        })?;
        // Each receipt is at least 200 bytes; refuse absurd counts early.
        if n > (bytes.len() / 200 + 1) as u64 {
            return Err(DecodeError::Truncated);
        }
        let mut receipts = Vec::with_capacity(n as usize);
        for _ in 0..n {
            receipts.push(Receipt::decode_from(&mut d)?);
        }
        d.finish()?;
        Ok(ReceiptChain { receipts })
    }
}

/// Mints a fresh nonce and produces the origin receipt (`prev` = zeros).
pub fn originate_chain<R: RngCore + ?Sized>(
    h: &PayloadDigest,
    node_key: &RelayKeypair,
    t_in: TaiTimestamp,
    t_out: TaiTimestamp,
    rng: &mut R,
) -> Result<ReceiptChain, ChainError> {
    if t_in.is_after(&t_out) {
        return Err(ChainError::Clock);
    }
    let nu = Nonce::random(rng);
    ReceiptChain::originate_with_nonce(h.hash, nu, node_key, t_in, t_out, &[0u8; 32])
}

pub fn append_hop(
    chain: &ReceiptChain,
    node_key: &RelayKeypair,
    t_in: TaiTimestamp,
    t_out: TaiTimestamp,
) -> Result<ReceiptChain, ChainError> {
    chain.append_hop(node_key, t_in, t_out)
}
