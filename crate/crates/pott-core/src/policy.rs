//! Deployment policy over structurally verified chains: signed allowlist
//! manifests, operator diversity, timing bounds, beacon anchors, size caps
//! and path diversity for high-stakes disputes.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::cbor::{CborError, Decoder, Encoder};
use crate::receipt::ReceiptChain;
use crate::signing::{sign_receipt, verify_signature, NodeId, RelayKeypair, SigningError};
use crate::timebase::{
    seconds_to_fine, within_owlt_envelope, BeaconReading, OwltEnvelope, PlanetaryDomain,
    TaiTimestamp, TimeError,
};
use crate::verifier::VerificationReport;

pub const DEFAULT_TTL_HOURS: u64 = 72;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PolicyError {
    Malformed(&'static str),
    Cbor(CborError),
    ManifestSignatureInvalid,
    /// Manifest signed by a key other than the one the caller trusts.
    UntrustedSigner,
    ManifestStale { age_seconds: u64, ttl_seconds: u64 },
    MixedPayload,
    InvalidProfile(&'static str),
    Signing(SigningError),
}

impl fmt::Display for PolicyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyError::Malformed(why) => write!(f, "malformed manifest: {why}"),
            PolicyError::Cbor(e) => write!(f, "malformed manifest: {e}"),
            PolicyError::ManifestSignatureInvalid => f.write_str("manifest signature invalid"),
            PolicyError::UntrustedSigner => f.write_str("manifest signer is not trusted"),
            PolicyError::ManifestStale { age_seconds, ttl_seconds } => {
                write!(f, "manifest stale: age {age_seconds} s exceeds ttl {ttl_seconds} s")
            }
            PolicyError::MixedPayload => f.write_str("chains carry different payload hashes"),
            PolicyError::InvalidProfile(why) => write!(f, "invalid policy profile: {why}"),
            PolicyError::Signing(e) => write!(f, "{e}"),
        }
    }
}

impl From<CborError> for PolicyError {
    fn from(e: CborError) -> Self {
        PolicyError::Cbor(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub node: NodeId,
    pub operator: String,
    pub planet: PlanetaryDomain,
}

/// Signed list of authorized relays with their operator and planetary
/// domains, plus revoked keys.
///
/// Wire form is a canonical CBOR map:
/// `{0: version, 1: [[node, operator, planet]...], 2: [revoked...],
///   3: issued_at (TAI s), 4: ttl_hours, 5: signer, 6: sig}`
/// with entries and revocations sorted by node id. The signature is BIP-340
/// over the same map without key 6.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AllowlistManifest {
    pub version: u64,
    pub entries: Vec<ManifestEntry>,
    pub revoked: BTreeSet<NodeId>,
    pub issued_at: TaiTimestamp,
    pub ttl_hours: u64,
    pub signer: NodeId,
    pub signature: [u8; 64],
}

impl AllowlistManifest {
    /// Sorts the entries and signs. Duplicate nodes are rejected.
    pub fn new_signed(
        version: u64,
        mut entries: Vec<ManifestEntry>,
        revoked: BTreeSet<NodeId>,
        issued_at: TaiTimestamp,
        ttl_hours: u64,
        key: &RelayKeypair,
    ) -> Result<Self, PolicyError> {
        entries.sort_by_key(|e| e.node);
        if entries.windows(2).any(|w| w[0].node == w[1].node) {
            return Err(PolicyError::Malformed("duplicate node entry"));
        }
        let mut m = AllowlistManifest {
            version,
            entries,
            revoked,
            issued_at: TaiTimestamp::from_seconds(issued_at.seconds),
            ttl_hours,
            signer: key.public(),
            signature: [0; 64],
        };
        m.signature =
            sign_receipt(&m.signing_message(), key, &[0; 32]).map_err(PolicyError::Signing)?;
        Ok(m)
    }

    fn write_body(&self, e: &mut Encoder, with_sig: bool) {
        e.map(if with_sig { 7 } else { 6 });
        e.uint(0).uint(self.version);
        e.uint(1).array(self.entries.len());
        for en in &self.entries {
            e.array(3).bytes(&en.node.0).text(&en.operator).uint(en.planet.code());
        }
        e.uint(2).array(self.revoked.len());
        for r in &self.revoked {
            e.bytes(&r.0);
        }
        e.uint(3).uint(self.issued_at.seconds);
        e.uint(4).uint(self.ttl_hours);
        e.uint(5).bytes(&self.signer.0);
        if with_sig {
            e.uint(6).bytes(&self.signature);
        }
    }

    pub fn signing_message(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        self.write_body(&mut e, false);
        e.into_bytes()
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        self.write_body(&mut e, true);
        e.into_bytes()
    }

    /// Parses without checking the signature or age.
    pub fn decode(bytes: &[u8]) -> Result<Self, PolicyError> {
        let mut d = Decoder::new(bytes);
        if d.map()? != 7 {
            return Err(PolicyError::Malformed("expected a 7-entry map"));
        }
        let key = |d: &mut Decoder<'_>, want: u64| -> Result<(), PolicyError> {
            if d.uint()? != want {
                return Err(PolicyError::Malformed("keys out of order"));
            }
            Ok(())
        };
        key(&mut d, 0)?;
        let version = d.uint()?;
        key(&mut d, 1)?;
        let n = d.array()?;
        let mut entries = Vec::new();
        for _ in 0..n {
            if d.array()? != 3 {
                return Err(PolicyError::Malformed("entry must have 3 fields"));
            }
            let node = node_id(d.bytes()?)?;
            let operator = d.text()?.to_string();
            let planet = PlanetaryDomain::from_code(d.uint()?)
                .ok_or(PolicyError::Malformed("unknown planetary domain"))?;
            if entries.last().is_some_and(|p: &ManifestEntry| p.node >= node) {
                return Err(PolicyError::Malformed("entries not strictly sorted"));
            }
            entries.push(ManifestEntry { node, operator, planet });
        }
        key(&mut d, 2)?;
        let n = d.array()?;
        let mut revoked = BTreeSet::new();
        let mut last: Option<NodeId> = None;
        for _ in 0..n {
            let node = node_id(d.bytes()?)?;
            if last.is_some_and(|p| p >= node) {
                return Err(PolicyError::Malformed("revocations not strictly sorted"));
            }
            last = Some(node);
            revoked.insert(node);
        }
        key(&mut d, 3)?;
        let issued_at = TaiTimestamp::from_seconds(d.uint()?);
        key(&mut d, 4)?;
        let ttl_hours = d.uint()?;
        key(&mut d, 5)?;
        let signer = node_id(d.bytes()?)?;
        key(&mut d, 6)?;
        let signature: [u8; 64] =
            d.bytes()?.try_into().map_err(|_| PolicyError::Malformed("signature must be 64 bytes"))?;
        d.finish()?;
        Ok(AllowlistManifest { version, entries, revoked, issued_at, ttl_hours, signer, signature })
    }

    pub fn signature_valid(&self) -> bool {
        verify_signature(&self.signing_message(), &self.signature, &self.signer)
    }

    pub fn entry(&self, node: &NodeId) -> Option<&ManifestEntry> {
        self.entries
            .binary_search_by(|e| e.node.cmp(node))
            .ok()
            .map(|i| &self.entries[i])
    }

    pub fn is_revoked(&self, node: &NodeId) -> bool {
        self.revoked.contains(node)
    }

    /// Listed and not revoked: the set structural verification checks R1
    /// against.
    pub fn allowlist(&self) -> BTreeSet<NodeId> {
        self.entries.iter().map(|e| e.node).filter(|n| !self.is_revoked(n)).collect()
    }
}

fn node_id(b: &[u8]) -> Result<NodeId, PolicyError> {
    b.try_into().map(NodeId).map_err(|_| PolicyError::Malformed("node id must be 32 bytes"))
}

/// Decodes a manifest and checks its signature, signer and age.
///
/// `now` is TAI; without it the age check is skipped. Without
/// `trusted_signer` any self-consistent signature is accepted.
pub fn load_manifest(
    bytes: &[u8],
    now: Option<TaiTimestamp>,
    trusted_signer: Option<&NodeId>,
) -> Result<AllowlistManifest, PolicyError> {
    let m = AllowlistManifest::decode(bytes)?;
    if !m.signature_valid() {
        return Err(PolicyError::ManifestSignatureInvalid);
    }
    if trusted_signer.is_some_and(|t| *t != m.signer) {
        return Err(PolicyError::UntrustedSigner);
    }
    if let Some(now) = now {
        let age = now.seconds.saturating_sub(m.issued_at.seconds);
        let ttl = m.ttl_hours.saturating_mul(3600);
        if age > ttl {
            return Err(PolicyError::ManifestStale { age_seconds: age, ttl_seconds: ttl });
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolicyProfile {
    pub min_hops: usize,
    pub min_operator_domains: usize,
    pub require_anchor_per_planetary_domain: bool,
    /// Per-hop timing bound J.
    pub j_seconds: f64,
    /// Largest beacon uncertainty accepted as an anchor.
    pub max_beacon_sigma_seconds: f64,
    pub max_hops: usize,
    pub max_chain_bytes: usize,
    pub high_stakes_min_diverse_chains: usize,
    pub retention_days: u64,
}

impl Default for PolicyProfile {
    fn default() -> Self {
        PolicyProfile {
            min_hops: 3,
            min_operator_domains: 2,
            require_anchor_per_planetary_domain: true,
            j_seconds: 3600.0,
            max_beacon_sigma_seconds: 60.0,
            max_hops: 32,
            max_chain_bytes: 8192,
            high_stakes_min_diverse_chains: 2,
            retention_days: 90,
        }
    }
}

impl PolicyProfile {
    pub fn validate(&self) -> Result<(), PolicyError> {
        let bad = PolicyError::InvalidProfile;
        if self.min_hops < 1 {
            return Err(bad("min_hops must be at least 1"));
        }
        if self.max_hops < self.min_hops {
            return Err(bad("max_hops below min_hops"));
        }
        if self.min_operator_domains < 1
            || self.max_chain_bytes == 0
            || self.high_stakes_min_diverse_chains == 0
            || self.retention_days == 0
        {
            return Err(bad("bounds must be positive"));
        }
        if !(self.j_seconds.is_finite() && self.j_seconds > 0.0) {
            return Err(bad("j_seconds must be positive"));
        }
        if !(self.max_beacon_sigma_seconds.is_finite() && self.max_beacon_sigma_seconds >= 0.0) {
            return Err(bad("max_beacon_sigma_seconds must be non-negative"));
        }
        Ok(())
    }

    fn j_fine(&self) -> i128 {
        seconds_to_fine(self.j_seconds).unwrap_or(i128::MAX)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Check {
    P1,
    P2,
    P3,
    P4,
    P5,
    P6,
    P7,
}

impl Check {
    pub fn id(&self) -> &'static str {
        match self {
            Check::P1 => "P1",
            Check::P2 => "P2",
            Check::P3 => "P3",
            Check::P4 => "P4",
            Check::P5 => "P5",
            Check::P6 => "P6",
            Check::P7 => "P7",
        }
    }

    /// P3 and P4 lower assurance; everything else rejects the chain.
    pub fn is_diversity(&self) -> bool {
        matches!(self, Check::P3 | Check::P4)
    }
}

/// Ordered from weakest to strongest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assurance {
    Rejected,
    NonProbative,
    Downgraded,
    Full,
}

impl Assurance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Assurance::Rejected => "rejected",
            Assurance::NonProbative => "non-probative",
            Assurance::Downgraded => "downgraded",
            Assurance::Full => "full",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub check: Check,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolicyVerdict {
    pub compliant: bool,
    pub assurance: Assurance,
    pub violations: Vec<Violation>,
    /// Beacon ids accepted as anchors, sorted.
    pub anchors: Vec<String>,
}

impl PolicyVerdict {
    pub fn checks_failed(&self) -> BTreeSet<Check> {
        self.violations.iter().map(|v| v.check).collect()
    }
}

/// Evaluates P1 through P7 against a chain and its structural report.
pub fn check_profile(
    report: &VerificationReport,
    chain: &ReceiptChain,
    manifest: &AllowlistManifest,
    profile: &PolicyProfile,
    env: &OwltEnvelope,
    beacons: &[BeaconReading],
) -> Result<PolicyVerdict, PolicyError> {
    if !manifest.signature_valid() {
        return Err(PolicyError::ManifestSignatureInvalid);
    }
    profile.validate()?;
    let receipts = chain.receipts();
    let mut v: Vec<Violation> = Vec::new();
    let mut push = |check: Check, detail: String| v.push(Violation { check, detail });

    // P1
    if !report.structural_ok {
        let rules: Vec<&str> = report.rules_failed().iter().map(|r| r.id()).collect();
        push(Check::P1, format!("structural rules failed: {}", rules.join(",")));
    }

    // P2
    if report.hop_count < profile.min_hops {
        push(Check::P2, format!("{} hops, need at least {}", report.hop_count, profile.min_hops));
    }

    let listed: Vec<Option<&ManifestEntry>> =
        receipts.iter().map(|r| manifest.entry(&r.node)).collect();

    // P3
    let operators: BTreeSet<&str> = listed.iter().flatten().map(|e| e.operator.as_str()).collect();
    if operators.len() < profile.min_operator_domains {
        push(
            Check::P3,
            format!(
                "{} operator domain(s), need at least {}",
                operators.len(),
                profile.min_operator_domains
            ),
        );
    }

    // P4
    let j = profile.j_fine();
    let acceptable = |b: &BeaconReading| -> bool {
        if !(b.sigma_t_seconds.is_finite() && b.sigma_t_seconds >= 0.0)
            || b.sigma_t_seconds > profile.max_beacon_sigma_seconds
        {
            return false;
        }
        let slack = j.saturating_add(seconds_to_fine(2.0 * b.sigma_t_seconds).unwrap_or(i128::MAX));
        let t = b.tai.fine();
        t >= report.t_first_in.fine().saturating_sub(slack)
            && t <= report.t_last_out.fine().saturating_add(slack)
    };
    let accepted: Vec<&BeaconReading> = beacons.iter().filter(|b| acceptable(b)).collect();
    let mut anchors: Vec<String> = accepted.iter().map(|b| b.beacon_id.clone()).collect();
    anchors.sort();
    anchors.dedup();
    let required: BTreeSet<PlanetaryDomain> = listed.iter().flatten().map(|e| e.planet).collect();
    let missing: Vec<&str> = required
        .iter()
        .filter(|d| !accepted.iter().any(|b| b.domain == **d))
        .map(|d| d.as_str())
        .collect();
    let no_anchor_at_all = profile.require_anchor_per_planetary_domain && accepted.is_empty();
    if profile.require_anchor_per_planetary_domain && (!missing.is_empty() || accepted.is_empty()) {
        let detail = if missing.is_empty() {
            "no acceptable beacon".to_string()
        } else {
            format!("no acceptable beacon for: {}", missing.join(","))
        };
        push(Check::P4, detail);
    }

    // P5
    for (i, r) in receipts.iter().enumerate() {
        if r.t_out.fine_since(&r.t_in) > j {
            push(Check::P5, format!("hop {i}: dwell exceeds J"));
        }
    }
    let slack = accepted.iter().map(|b| b.sigma_t_seconds).fold(0.0f64, f64::max) * 2.0;
    for i in 1..receipts.len() {
        let (Some(a), Some(b)) = (listed[i - 1], listed[i]) else {
            continue;
        };
        let (send, recv) = (receipts[i - 1].t_out, receipts[i].t_in);
        if a.planet == b.planet {
            if recv.fine_since(&send) > j {
                push(Check::P5, format!("hop {i}: same-domain transit exceeds J"));
            }
            continue;
        }
        match within_owlt_envelope(send, recv, env, slack) {
            Ok(true) => {}
            Ok(false) => push(Check::P5, format!("hop {i}: transit outside light-time envelope")),
            Err(TimeError::WindowNotCovered { .. }) => {
                push(Check::P5, format!("hop {i}: no envelope window covers handoff"))
            }
            Err(e) => push(Check::P5, format!("hop {i}: {e}")),
        }
    }

    // P6
    if report.hop_count > profile.max_hops {
        push(Check::P6, format!("{} hops exceeds cap {}", report.hop_count, profile.max_hops));
    }
    let size = chain.receipts_encoded_len();
    if size > profile.max_chain_bytes {
        push(Check::P6, format!("{size} bytes exceeds cap {}", profile.max_chain_bytes));
    }

    // P7
    for (i, r) in receipts.iter().enumerate() {
        if manifest.is_revoked(&r.node) {
            push(Check::P7, format!("hop {i}: node {} revoked", r.node));
        } else if listed[i].is_none() {
            push(Check::P7, format!("hop {i}: node {} not listed", r.node));
        }
    }

    v.sort_by_key(|x| x.check);
    let hard = v.iter().any(|x| !x.check.is_diversity());
    let assurance = if hard {
        Assurance::Rejected
    } else if no_anchor_at_all && operators.len() <= 1 {
        Assurance::NonProbative
    } else if !v.is_empty() {
        Assurance::Downgraded
    } else {
        Assurance::Full
    };
    Ok(PolicyVerdict {
        compliant: assurance == Assurance::Full,
        assurance,
        violations: v,
        anchors,
    })
}

/// True iff at least `profile.high_stakes_min_diverse_chains` compliant chains
/// are pairwise disjoint in relay operators (every hop after the shared
/// origin) and, where both carry anchors, in beacon ids.
pub fn check_high_stakes(
    sets: &[(ReceiptChain, PolicyVerdict)],
    manifest: &AllowlistManifest,
    profile: &PolicyProfile,
) -> Result<bool, PolicyError> {
    let mut h = None;
    for (c, _) in sets {
        if let Some(r) = c.receipts().first() {
            if *h.get_or_insert(r.h) != r.h {
                return Err(PolicyError::MixedPayload);
            }
        }
    }
    let candidates: Vec<(BTreeSet<String>, BTreeSet<&str>)> = sets
        .iter()
        .filter(|(c, v)| v.compliant && !c.is_empty())
        .map(|(c, v)| {
            let ops = c.receipts()[1..]
                .iter()
                .map(|r| match manifest.entry(&r.node) {
                    Some(e) => e.operator.clone(),
                    None => r.node.to_string(),
                })
                .collect();
            let beacons = v.anchors.iter().map(String::as_str).collect();
            (ops, beacons)
        })
        .collect();
    let disjoint = |a: usize, b: usize| {
        let (oa, ba) = &candidates[a];
        let (ob, bb) = &candidates[b];
        oa.is_disjoint(ob) && (ba.is_empty() || bb.is_empty() || ba.is_disjoint(bb))
    };
    let need = profile.high_stakes_min_diverse_chains;
    let mut picked = Vec::new();
    Ok(pick(0, need, candidates.len(), &mut picked, &disjoint))
}

fn pick(
    from: usize,
    need: usize,
    n: usize,
    picked: &mut Vec<usize>,
    disjoint: &dyn Fn(usize, usize) -> bool,
) -> bool {
    if picked.len() == need {
        return true;
    }
    for i in from..n {
        if n - i < need - picked.len() {
            break;
        }
        if picked.iter().all(|&p| disjoint(p, i)) {
            picked.push(i);
            if pick(i + 1, need, n, picked, disjoint) {
                return true;
            }
            picked.pop();
        }
    }
    false
}
