//! Commit-and-reveal mode: publish a transcript hash with time aggregates for
//! routine attestation, open the full chain only in a dispute.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;
use core::fmt;

use sha2::{Digest, Sha256};

use crate::cbor::{CborError, Decoder, Encoder};
use crate::receipt::ReceiptChain;
use crate::signing::NodeId;
use crate::timebase::TaiTimestamp;
use crate::verifier::{verify_structure, Rule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TranscriptCommitment {
    pub h_txpt: [u8; 32],
    pub t_min_in: TaiTimestamp,
    pub t_max_out: TaiTimestamp,
    pub hop_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PrivacyError {
    EmptyChain,
    Cbor(CborError),
    Malformed(&'static str),
}

impl fmt::Display for PrivacyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrivacyError::EmptyChain => f.write_str("cannot commit to an empty chain"),
            PrivacyError::Cbor(e) => write!(f, "malformed commitment: {e}"),
            PrivacyError::Malformed(why) => write!(f, "malformed commitment: {why}"),
        }
    }
}

impl From<CborError> for PrivacyError {
    fn from(e: CborError) -> Self {
        PrivacyError::Cbor(e)
    }
}

/// SHA-256 over the full encodings (signatures included) of every receipt,
/// in hop order.
pub fn transcript_hash(chain: &ReceiptChain) -> [u8; 32] {
    let mut h = Sha256::new();
    for r in chain.receipts() {
        h.update(r.encode());
    }
    h.finalize().into()
}

fn aggregates(chain: &ReceiptChain) -> Option<(TaiTimestamp, TaiTimestamp)> {
    let rs = chain.receipts();
    let min_in = rs.iter().map(|r| r.t_in).min_by(|a, b| a.time_cmp(b))?;
    let max_out = rs.iter().map(|r| r.t_out).max_by(|a, b| a.time_cmp(b))?;
    Some((min_in, max_out))
}

pub fn commit_transcript(chain: &ReceiptChain) -> Result<TranscriptCommitment, PrivacyError> {
    let (t_min_in, t_max_out) = aggregates(chain).ok_or(PrivacyError::EmptyChain)?;
    Ok(TranscriptCommitment {
        h_txpt: transcript_hash(chain),
        t_min_in,
        t_max_out,
        hop_count: chain.len() as u64,
    })
}

impl TranscriptCommitment {
    /// `{0: h_txpt, 1: t_min_in, 2: t_max_out, 3: hop_count}` with seconds as
    /// fixed 8-byte uints; fractions, when present, under keys 4 and 5.
    pub fn encode(&self) -> Vec<u8> {
        let extra = self.t_min_in.frac.is_some() as usize + self.t_max_out.frac.is_some() as usize;
        let mut e = Encoder::with_capacity(64);
        e.map(4 + extra);
        e.uint(0).bytes(&self.h_txpt);
        e.uint(1).uint_fixed64(self.t_min_in.seconds);
        e.uint(2).uint_fixed64(self.t_max_out.seconds);
        e.uint(3).uint(self.hop_count);
        if let Some(f) = self.t_min_in.frac {
            e.uint(4).uint_fixed32(f);
        }
        if let Some(f) = self.t_max_out.frac {
            e.uint(5).uint_fixed32(f);
        }
        e.into_bytes()
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, PrivacyError> {
        let mut d = Decoder::new(bytes);
        let n = d.map()?;
        if !(4..=6).contains(&n) {
            return Err(PrivacyError::Malformed("expected 4 to 6 entries"));
        }
        let expect = |d: &mut Decoder<'_>, k: u64| -> Result<(), PrivacyError> {
            if d.uint()? != k {
                return Err(PrivacyError::Malformed("keys out of order"));
            }
            Ok(())
        };
        expect(&mut d, 0)?;
        let h_txpt = d.bytes()?.try_into().map_err(|_| PrivacyError::Malformed("h_txpt length"))?;
        expect(&mut d, 1)?;
        let mut t_min_in = TaiTimestamp::from_seconds(d.uint_fixed64()?);
        expect(&mut d, 2)?;
        let mut t_max_out = TaiTimestamp::from_seconds(d.uint_fixed64()?);
        expect(&mut d, 3)?;
        let hop_count = d.uint()?;
        for _ in 4..n {
            match d.uint()? {
                4 if t_min_in.frac.is_none() && t_max_out.frac.is_none() => {
                    t_min_in.frac = Some(d.uint_fixed32()?)
                }
                5 if t_max_out.frac.is_none() => t_max_out.frac = Some(d.uint_fixed32()?),
                _ => return Err(PrivacyError::Malformed("unexpected key")),
            }
        }
        d.finish()?;
        if hop_count == 0 {
            return Err(PrivacyError::Malformed("hop_count must be at least 1"));
        }
        if t_min_in.is_after(&t_max_out) {
            return Err(PrivacyError::Malformed("t_min_in after t_max_out"));
        }
        Ok(TranscriptCommitment { h_txpt, t_min_in, t_max_out, hop_count })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpeningViolation {
    TranscriptHashMismatch,
    /// Hop time outside the committed `[t_min_in, t_max_out]`.
    OutsideBounds { hop: usize },
    /// Committed aggregates are not the chain's actual min/max.
    AggregateMismatch,
    HopCountMismatch { committed: u64, actual: u64 },
    Structural(Rule),
    EmptyChain,
}

impl fmt::Display for OpeningViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpeningViolation::TranscriptHashMismatch => f.write_str("transcript hash mismatch"),
            OpeningViolation::OutsideBounds { hop } => {
                write!(f, "hop {hop} times outside committed bounds")
            }
            OpeningViolation::AggregateMismatch => {
                f.write_str("committed aggregates differ from chain min/max")
            }
            OpeningViolation::HopCountMismatch { committed, actual } => {
                write!(f, "hop count {actual} differs from committed {committed}")
            }
            OpeningViolation::Structural(r) => write!(f, "structural rule {} failed", r.id()),
            OpeningViolation::EmptyChain => f.write_str("opened chain is empty"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Opening {
    pub ok: bool,
    pub violations: Vec<OpeningViolation>,
}

/// Checks a revealed chain against its commitment. Policy bounds are judged
/// separately.
pub fn verify_opening(
    commitment: &TranscriptCommitment,
    chain: &ReceiptChain,
    allowlist: &BTreeSet<NodeId>,
) -> Opening {
    let mut v = Vec::new();
    if transcript_hash(chain) != commitment.h_txpt {
        v.push(OpeningViolation::TranscriptHashMismatch);
    }
    for (i, r) in chain.receipts().iter().enumerate() {
        if commitment.t_min_in.is_after(&r.t_in) || r.t_out.is_after(&commitment.t_max_out) {
            v.push(OpeningViolation::OutsideBounds { hop: i });
        }
    }
    if let Some((lo, hi)) = aggregates(chain) {
        if lo.time_cmp(&commitment.t_min_in).is_ne() || hi.time_cmp(&commitment.t_max_out).is_ne() {
            v.push(OpeningViolation::AggregateMismatch);
        }
    }
    let actual = chain.len() as u64;
    if actual != commitment.hop_count {
        v.push(OpeningViolation::HopCountMismatch { committed: commitment.hop_count, actual });
    }
    match verify_structure(chain, allowlist) {
        Ok(rep) => v.extend(rep.rules_failed().into_iter().map(OpeningViolation::Structural)),
        Err(_) => v.push(OpeningViolation::EmptyChain),
    }
    Opening { ok: v.is_empty(), violations: v }
}
