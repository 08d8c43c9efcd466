//! Structural chain verification and evidence-set grouping.
//!
//! Four rules, always all evaluated:
//!
//! * **R1** every signature verifies under its receipt's node, and the node
//!   is on the allowlist;
//! * **R2** every receipt carries the origin's `(h, nu)`;
//! * **R3** `t_in <= t_out` on each hop and `t_out` strictly before the next
//!   hop's `t_in`;
//! * **R4** `prev` is zero on the origin and the previous receipt's link hash
//!   everywhere else.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;

use crate::digest::PayloadHash;
use crate::receipt::{Nonce, ReceiptChain, ZERO_PREV};
use crate::signing::{verify_signature, NodeId};
use crate::timebase::TaiTimestamp;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
}

impl Rule {
    pub fn id(&self) -> &'static str {
        match self {
            Rule::R1 => "R1",
            Rule::R2 => "R2",
            Rule::R3 => "R3",
            Rule::R4 => "R4",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FailureKind {
    InvalidSignature,
    UnauthorizedNode,
    PayloadMismatch,
    NonceMismatch,
    /// `t_in` after `t_out` on the same hop.
    DwellInverted,
    /// `t_in` not strictly after the previous hop's `t_out`.
    HandoffNotAfter,
    NonZeroOriginPrev,
    BrokenLink,
}

impl FailureKind {
    pub fn rule(&self) -> Rule {
        match self {
            FailureKind::InvalidSignature | FailureKind::UnauthorizedNode => Rule::R1,
            FailureKind::PayloadMismatch | FailureKind::NonceMismatch => Rule::R2,
            FailureKind::DwellInverted | FailureKind::HandoffNotAfter => Rule::R3,
            FailureKind::NonZeroOriginPrev | FailureKind::BrokenLink => Rule::R4,
        }
    }
}

impl fmt::Display for FailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FailureKind::InvalidSignature => "signature does not verify under the receipt node",
            FailureKind::UnauthorizedNode => "node is not on the allowlist",
            FailureKind::PayloadMismatch => "payload hash differs from the origin receipt",
            FailureKind::NonceMismatch => "nonce differs from the origin receipt",
            FailureKind::DwellInverted => "t_in is after t_out",
            FailureKind::HandoffNotAfter => "t_in does not follow previous hop's t_out",
            FailureKind::NonZeroOriginPrev => "origin receipt prev is not all-zero",
            FailureKind::BrokenLink => "prev does not match the previous receipt's link hash",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Failure {
    pub rule: Rule,
    pub hop: usize,
    pub kind: FailureKind,
}

/// `(h, nu)`: one evidence set per payload instance.
pub type EvidenceKey = (PayloadHash, Nonce);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerificationReport {
    pub structural_ok: bool,
    pub failures: Vec<Failure>,
    pub evidence_key: EvidenceKey,
    pub hop_count: usize,
    pub t_first_in: TaiTimestamp,
    pub t_last_out: TaiTimestamp,
}

impl VerificationReport {
    pub fn rules_failed(&self) -> BTreeSet<Rule> {
        self.failures.iter().map(|f| f.rule).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyError {
    EmptyChain,
}

impl fmt::Display for VerifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("cannot verify an empty chain")
    }
}

pub fn verify_structure(
    chain: &ReceiptChain,
    allowlist: &BTreeSet<NodeId>,
) -> Result<VerificationReport, VerifyError> {
    let receipts = chain.receipts();
    let origin = receipts.first().ok_or(VerifyError::EmptyChain)?;
    let mut failures = Vec::new();
    let mut fail = |rule_kind: FailureKind, hop: usize| {
        failures.push(Failure { rule: rule_kind.rule(), hop, kind: rule_kind })
    };

    // Messages are reused by R1 and R4.
    let messages: Vec<Vec<u8>> = receipts.iter().map(|r| r.signing_message()).collect();

    for (i, r) in receipts.iter().enumerate() {
        if !verify_signature(&messages[i], &r.sig, &r.node) {
            fail(FailureKind::InvalidSignature, i);
        }
        if !allowlist.contains(&r.node) {
            fail(FailureKind::UnauthorizedNode, i);
        }
    }

    for (i, r) in receipts.iter().enumerate().skip(1) {
        if r.h != origin.h {
            fail(FailureKind::PayloadMismatch, i);
        }
        if r.nu != origin.nu {
            fail(FailureKind::NonceMismatch, i);
        }
    }

    for (i, r) in receipts.iter().enumerate() {
        if i > 0 && !r.t_in.is_after(&receipts[i - 1].t_out) {
            fail(FailureKind::HandoffNotAfter, i);
        }
        if r.t_in.is_after(&r.t_out) {
            fail(FailureKind::DwellInverted, i);
        }
    }

    if origin.prev != ZERO_PREV {
        fail(FailureKind::NonZeroOriginPrev, 0);
    }
    for i in 1..receipts.len() {
        let expected = crate::digest::sha256(&messages[i - 1]);
        if receipts[i].prev != expected {
            fail(FailureKind::BrokenLink, i);
        }
    }

    // Keep R1..R4 ordering in the report; within a rule, hop order.
    failures.sort_by_key(|f| (f.rule, f.hop));

    Ok(VerificationReport {
        structural_ok: failures.is_empty(),
        failures,
        evidence_key: (origin.h, origin.nu),
        hop_count: receipts.len(),
        t_first_in: origin.t_in,
        t_last_out: receipts[receipts.len() - 1].t_out,
    })
}

/// Groups chains by the origin receipt's `(h, nu)`. Empty chains are skipped.
/// Duplicates are kept.
pub fn evidence_sets(chains: &[ReceiptChain]) -> BTreeMap<EvidenceKey, Vec<ReceiptChain>> {
    let mut sets: BTreeMap<EvidenceKey, Vec<ReceiptChain>> = BTreeMap::new();
    for c in chains {
        if let Some(r) = c.receipts().first() {
            sets.entry((r.h, r.nu)).or_default().push(c.clone());
        }
    }
    sets
}

/// Evidence sets whose chains disagree on the origin receipt.
///
/// Copies of one payload instance share `R_0` (the originator signs once), so
/// differing origin receipts under one `(h, nu)` mean the originator minted
/// the same nonce for more than one transmission.
pub fn nonce_reuse(sets: &BTreeMap<EvidenceKey, Vec<ReceiptChain>>) -> Vec<EvidenceKey> {
    sets.iter()
        .filter(|(_, chains)| {
            let first = &chains[0].receipts()[0];
            chains.iter().any(|c| &c.receipts()[0] != first)
        })
        .map(|(k, _)| *k)
        .collect()
}
