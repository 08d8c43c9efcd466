//! Seeded scenario generator for honest and adversarial receipt chains,
//! beacon readings and synthetic Bitcoin header chains.
//!
//! All randomness comes from one `Xoshiro256PlusPlus` seeded with
//! `seed_from_u64(scenario.seed)` and is drawn in a fixed order: manifest key,
//! relay keys, then each adversary action in turn. Signatures use all-zero
//! auxiliary randomness, so a scenario reproduces byte for byte.
//!
//! Every output carries an [`ExpectedLabel`] computed from what the generator
//! did (which hops it tampered with, which relays it used, where it put the
//! beacons), never by running the verifier.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;
use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::anchor::BlockHeader;
use crate::assess::Assessment;
use crate::digest::{compute_payload_digest, double_sha256, DigestKind, PayloadHash};
use crate::policy::{AllowlistManifest, Assurance, ManifestEntry, PolicyProfile};
use crate::receipt::{Nonce, Receipt, ReceiptChain, RECEIPT_LEN, ZERO_PREV};
use crate::signing::RelayKeypair;
use crate::timebase::{BeaconReading, OwltEnvelope, PlanetaryDomain, TaiTimestamp};

const NO_AUX: [u8; 32] = [0u8; 32];
/// Same-domain handoffs take 1..=30 s.
const LOCAL_TRANSIT_MAX: u64 = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimError {
    ScenarioInvalid(String),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimError::ScenarioInvalid(why) => write!(f, "invalid scenario: {why}"),
        }
    }
}

fn invalid<T>(why: String) -> Result<T, SimError> {
    Err(SimError::ScenarioInvalid(why))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelaySpec {
    pub operator: String,
    pub planet: PlanetaryDomain,
    pub revoked: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeaconSpec {
    pub id: String,
    pub domain: PlanetaryDomain,
    pub sigma_t_seconds: f64,
    /// Offset of the reading from the chain's midpoint; nonzero values model
    /// a beacon running outside its declared uncertainty.
    pub excursion_seconds: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSpec {
    /// Indices into `Scenario::relays`, origin first.
    pub relays: Vec<usize>,
    /// Indices into `Scenario::beacons` read alongside chains on this path.
    pub beacons: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JitterModel {
    /// Dwell drawn uniformly from `[min, max]` whole seconds.
    Uniform { min_seconds: u64, max_seconds: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryAction {
    Honest { path: usize },
    /// Origin and hops before `cut` from a chain on path `a`, the rest copied
    /// byte for byte from an independent chain on path `b`.
    Splice { a: usize, b: usize, cut: usize },
    /// Moves `hop` back by `seconds` (negative). Unsigned edits patch the
    /// encoded timestamps of that one receipt; resigned edits shift hops
    /// `0..=hop` and re-sign the whole chain, as colluding relays could.
    Backdate { path: usize, hop: usize, seconds: i64, resigned: bool },
    Truncate { path: usize, after_hop: usize },
    /// Inserts a relay holding a fresh, unlisted key at position `hop`.
    SybilInsert { path: usize, hop: usize },
    /// Two transmissions of one payload under the same nonce.
    NonceReuse { path: usize },
    /// The chain never arrives.
    Drop { path: usize, after_hop: usize },
}

impl AdversaryAction {
    pub fn kind(&self) -> &'static str {
        match self {
            AdversaryAction::Honest { .. } => "honest",
            AdversaryAction::Splice { .. } => "splice",
            AdversaryAction::Backdate { resigned: false, .. } => "backdate-unsigned",
            AdversaryAction::Backdate { resigned: true, .. } => "backdate-resigned",
            AdversaryAction::Truncate { .. } => "truncate",
            AdversaryAction::SybilInsert { .. } => "sybil",
            AdversaryAction::NonceReuse { .. } => "nonce-reuse",
            AdversaryAction::Drop { .. } => "drop",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// TAI seconds of the first origin receipt.
    pub start_tai: u64,
    /// Gap between the start times of consecutive actions.
    pub action_spacing_seconds: u64,
    pub relays: Vec<RelaySpec>,
    pub paths: Vec<PathSpec>,
    pub beacons: Vec<BeaconSpec>,
    pub envelope: OwltEnvelope,
    pub profile: PolicyProfile,
    pub jitter: JitterModel,
    pub payload_kind: DigestKind,
    pub manifest_ttl_hours: u64,
    pub adversary: Vec<AdversaryAction>,
}

impl Scenario {
    /// Dwell defaults to uniform on `[1, J]`.
    pub fn default_jitter(profile: &PolicyProfile) -> JitterModel {
        JitterModel::Uniform { min_seconds: 1, max_seconds: (profile.j_seconds as u64).max(1) }
    }
}

/// What the verifier and policy engine are expected to report.
///
/// `flags` lists rule and check ids (`R1`..`R4`, `P1`..`P7`, `E1` for nonce
/// reuse across the corpus) that must be reported; others may accompany
/// them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedLabel {
    pub delivered: bool,
    pub compliant: bool,
    pub assurance: Option<Assurance>,
    pub flags: BTreeSet<&'static str>,
}

impl ExpectedLabel {
    /// Whether an assessment (or its absence, for undelivered chains) agrees
    /// with this label: same delivery, compliance and assurance, and every
    /// expected flag reported.
    pub fn matches(&self, got: Option<&Assessment>) -> bool {
        match got {
            None => !self.delivered,
            Some(a) => {
                self.delivered
                    && self.compliant == a.compliant()
                    && self.assurance == Some(a.assurance())
                    && self.flags.is_subset(&a.flags())
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimEntry {
    pub name: String,
    pub chain: Option<ReceiptChain>,
    pub beacons: Vec<BeaconReading>,
    pub label: ExpectedLabel,
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub manifest: AllowlistManifest,
    pub manifest_key: RelayKeypair,
    pub relay_keys: Vec<RelayKeypair>,
    pub entries: Vec<SimEntry>,
}

/// One hop as the generator knows it.
#[derive(Clone)]
struct Hop {
    key: RelayKeypair,
    /// `None` for relays absent from the manifest.
    relay: Option<usize>,
    planet: PlanetaryDomain,
}

struct Gen<'a> {
    s: &'a Scenario,
    rng: Xoshiro256PlusPlus,
    keys: Vec<RelayKeypair>,
}

pub fn run_scenario(s: &Scenario) -> Result<SimOutput, SimError> {
    validate(s)?;
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(s.seed);
    let manifest_key = RelayKeypair::generate(&mut rng);
    let keys: Vec<RelayKeypair> = s.relays.iter().map(|_| RelayKeypair::generate(&mut rng)).collect();

    let entries = s
        .relays
        .iter()
        .zip(&keys)
        .map(|(r, k)| ManifestEntry { node: k.public(), operator: r.operator.clone(), planet: r.planet })
        .collect();
    let revoked = s
        .relays
        .iter()
        .zip(&keys)
        .filter(|(r, _)| r.revoked)
        .map(|(_, k)| k.public())
        .collect();
    let manifest = AllowlistManifest::new_signed(
        1,
        entries,
        revoked,
        TaiTimestamp::from_seconds(s.start_tai),
        s.manifest_ttl_hours,
        &manifest_key,
    )
    .map_err(|e| SimError::ScenarioInvalid(format!("{e}")))?;

    let mut g = Gen { s, rng, keys };
    let mut out = Vec::new();
    for (i, action) in s.adversary.iter().enumerate() {
        let start = s.start_tai + i as u64 * s.action_spacing_seconds;
        let name = format!("{i:02}-{}", action.kind());
        g.run_action(&name, *action, start, &mut out)?;
    }
    let relay_keys = g.keys;
    Ok(SimOutput { manifest, manifest_key, relay_keys, entries: out })
}

fn validate(s: &Scenario) -> Result<(), SimError> {
    if s.relays.is_empty() {
        return invalid("at least one relay is required".into());
    }
    s.profile.validate().map_err(|e| SimError::ScenarioInvalid(format!("{e}")))?;
    let JitterModel::Uniform { min_seconds, max_seconds } = s.jitter;
    if min_seconds > max_seconds {
        return invalid("jitter min exceeds max".into());
    }
    for (i, p) in s.paths.iter().enumerate() {
        if p.relays.is_empty() {
            return invalid(format!("path {i} is empty"));
        }
        if let Some(r) = p.relays.iter().find(|&&r| r >= s.relays.len()) {
            return invalid(format!("path {i} names relay {r}, which does not exist"));
        }
        if let Some(b) = p.beacons.iter().find(|&&b| b >= s.beacons.len()) {
            return invalid(format!("path {i} names beacon {b}, which does not exist"));
        }
    }
    for b in &s.beacons {
        if !(b.sigma_t_seconds.is_finite() && b.sigma_t_seconds >= 0.0) {
            return invalid(format!("beacon {} has an invalid sigma", b.id));
        }
    }
    let path_len = |p: usize| -> Result<usize, SimError> {
        match s.paths.get(p) {
            Some(spec) => Ok(spec.relays.len()),
            None => invalid(format!("path {p} does not exist")),
        }
    };
    for (i, a) in s.adversary.iter().enumerate() {
        let bad = |why: &str| invalid(format!("action {i}: {why}"));
        match *a {
            AdversaryAction::Honest { path } | AdversaryAction::NonceReuse { path } => {
                path_len(path)?;
            }
            AdversaryAction::Splice { a, b, cut } => {
                let (la, lb) = (path_len(a)?, path_len(b)?);
                if cut == 0 || cut >= la || cut >= lb {
                    return bad("cut must satisfy 1 <= cut < both path lengths");
                }
            }
            AdversaryAction::Backdate { path, hop, seconds, resigned } => {
                let n = path_len(path)?;
                if seconds >= 0 {
                    return bad("backdate offset must be negative");
                }
                if hop >= n || (resigned && hop + 1 >= n) {
                    return bad("backdated hop out of range");
                }
            }
            AdversaryAction::Truncate { path, after_hop }
            | AdversaryAction::Drop { path, after_hop } => {
                if after_hop >= path_len(path)? {
                    return bad("after_hop out of range");
                }
            }
            AdversaryAction::SybilInsert { path, hop } => {
                if hop > path_len(path)? {
                    return bad("insertion point out of range");
                }
            }
        }
    }
    Ok(())
}

impl Gen<'_> {
    fn hops(&self, path: usize) -> Vec<Hop> {
        self.s.paths[path]
            .relays
            .iter()
            .map(|&r| Hop { key: self.keys[r].clone(), relay: Some(r), planet: self.s.relays[r].planet })
            .collect()
    }

    fn payload(&mut self) -> PayloadHash {
        let bytes: Vec<u8> = match self.s.payload_kind {
            DigestKind::BitcoinHeader => (0..80).map(|_| self.rng.gen()).collect(),
            // One-element filter: count byte plus a 3-byte Golomb-Rice body.
            DigestKind::Bip157Filter => {
                vec![1, self.rng.gen(), self.rng.gen(), self.rng.gen()]
            }
            _ => (0..64).map(|_| self.rng.gen()).collect(),
        };
        compute_payload_digest(&bytes, self.s.payload_kind)
            .expect("generated payloads are well-formed")
            .hash
    }

    /// Draws hop times starting at `start`.
    fn times(&mut self, hops: &[Hop], start: u64) -> Result<Vec<(u64, u64)>, SimError> {
        let JitterModel::Uniform { min_seconds, max_seconds } = self.s.jitter;
        let mut out: Vec<(u64, u64)> = Vec::with_capacity(hops.len());
        for (i, hop) in hops.iter().enumerate() {
            let t_in = match out.last() {
                None => start,
                Some(&(_, prev_out)) => {
                    let transit = if hop.planet == hops[i - 1].planet {
                        self.rng.gen_range(1..=LOCAL_TRANSIT_MAX)
                    } else {
                        let Some(w) = self.s.envelope.window_at(prev_out) else {
                            return invalid(format!("no light-time window covers TAI {prev_out}"));
                        };
                        self.rng.gen_range(w.min_owlt..=w.max_owlt).max(1)
                    };
                    prev_out + transit
                }
            };
            let dwell = self.rng.gen_range(min_seconds..=max_seconds);
            out.push((t_in, t_in + dwell));
        }
        Ok(out)
    }

    fn sign_chain(
        &self,
        hops: &[Hop],
        times: &[(u64, u64)],
        h: PayloadHash,
        nu: Nonce,
    ) -> ReceiptChain {
        let t = TaiTimestamp::from_seconds;
        let mut c = ReceiptChain::originate_with_nonce(h, nu, &hops[0].key, t(times[0].0), t(times[0].1), &NO_AUX)
            .expect("generated times are ordered");
        for (hop, &(a, b)) in hops.iter().zip(times).skip(1) {
            c = c.append_hop(&hop.key, t(a), t(b)).expect("generated times are ordered");
        }
        c
    }

    fn honest(&mut self, hops: &[Hop], start: u64) -> Result<(ReceiptChain, Vec<(u64, u64)>), SimError> {
        let h = self.payload();
        let nu = Nonce::random(&mut self.rng);
        let times = self.times(hops, start)?;
        Ok((self.sign_chain(hops, &times, h, nu), times))
    }

    fn beacons(&self, path: usize, times: &[(u64, u64)]) -> Vec<BeaconReading> {
        let first = times[0].0;
        let last = times[times.len() - 1].1;
        let mid = first + (last - first) / 2;
        self.s.paths[path]
            .beacons
            .iter()
            .map(|&b| {
                let spec = &self.s.beacons[b];
                BeaconReading {
                    beacon_id: spec.id.clone(),
                    domain: spec.domain,
                    tai: TaiTimestamp::from_seconds(mid.saturating_add_signed(spec.excursion_seconds)),
                    sigma_t_seconds: spec.sigma_t_seconds,
                }
            })
            .collect()
    }

    /// Label of an untampered chain over `hops`, from the scenario's relay
    /// and beacon configuration.
    fn base_label(&self, hops: &[Hop], times: &[(u64, u64)], beacons: &[BeaconReading]) -> ExpectedLabel {
        let p = &self.s.profile;
        let mut flags = BTreeSet::new();
        let mut operators = BTreeSet::new();
        let mut planets = BTreeSet::new();
        for hop in hops {
            match hop.relay {
                Some(r) => {
                    operators.insert(self.s.relays[r].operator.as_str());
                    planets.insert(self.s.relays[r].planet);
                    if self.s.relays[r].revoked {
                        flags.extend(["R1", "P1", "P7"]);
                    }
                }
                None => {
                    flags.extend(["R1", "P1", "P7"]);
                }
            }
        }
        if hops.len() < p.min_hops {
            flags.insert("P2");
        }
        if hops.len() > p.max_hops || hops.len() * RECEIPT_LEN > p.max_chain_bytes {
            flags.insert("P6");
        }
        if operators.len() < p.min_operator_domains {
            flags.insert("P3");
        }
        let accepted = accepted_beacons(beacons, times, p);
        let no_anchor = p.require_anchor_per_planetary_domain && accepted.is_empty();
        if p.require_anchor_per_planetary_domain
            && (no_anchor || planets.iter().any(|d| !accepted.iter().any(|b| b.domain == *d)))
        {
            flags.insert("P4");
        }
        finish_label(flags, no_anchor && operators.len() <= 1)
    }

    fn run_action(
        &mut self,
        name: &str,
        action: AdversaryAction,
        start: u64,
        out: &mut Vec<SimEntry>,
    ) -> Result<(), SimError> {
        match action {
            AdversaryAction::Honest { path } => {
                let hops = self.hops(path);
                let (chain, times) = self.honest(&hops, start)?;
                let beacons = self.beacons(path, &times);
                let label = self.base_label(&hops, &times, &beacons);
                out.push(SimEntry { name: name.into(), chain: Some(chain), beacons, label });
            }
            AdversaryAction::Splice { a, b, cut } => {
                let (hops_a, hops_b) = (self.hops(a), self.hops(b));
                let (ca, times_a) = self.honest(&hops_a, start)?;
                let (cb, times_b) = self.honest(&hops_b, start + self.s.action_spacing_seconds / 2)?;
                let mut rs: Vec<Receipt> = ca.receipts()[..cut].to_vec();
                rs.extend(cb.receipts()[cut..].iter().map(reencode));
                let mut times: Vec<(u64, u64)> = times_a[..cut].to_vec();
                times.extend_from_slice(&times_b[cut..]);
                let beacons = self.beacons(a, &times);
                let label = tampered(["R2", "R4", "P1"]);
                out.push(SimEntry {
                    name: name.into(),
                    chain: Some(ReceiptChain::from_receipts(rs)),
                    beacons,
                    label,
                });
            }
            AdversaryAction::Backdate { path, hop, seconds, resigned } => {
                let hops = self.hops(path);
                let (chain, mut times) = self.honest(&hops, start)?;
                if resigned {
                    for t in &mut times[..=hop] {
                        t.0 = t.0.checked_add_signed(seconds).ok_or_else(underflow)?;
                        t.1 = t.1.checked_add_signed(seconds).ok_or_else(underflow)?;
                    }
                    let r0 = &chain.receipts()[0];
                    let forged = self.sign_chain(&hops, &times, r0.h, r0.nu);
                    let beacons = self.beacons(path, &times);
                    let mut label = self.base_label(&hops, &times, &beacons);
                    if self.handoff_out_of_bounds(&hops, &times, hop + 1, &beacons) {
                        label.flags.insert("P5");
                        label = finish_label(label.flags, false);
                    }
                    out.push(SimEntry { name: name.into(), chain: Some(forged), beacons, label });
                } else {
                    let mut rs = chain.into_receipts();
                    rs[hop] = patch_times(&rs[hop], seconds);
                    let beacons = self.beacons(path, &times);
                    let mut flags = BTreeSet::from(["R1", "P1"]);
                    if hop + 1 < rs.len() {
                        flags.insert("R4");
                    }
                    out.push(SimEntry {
                        name: name.into(),
                        chain: Some(ReceiptChain::from_receipts(rs)),
                        beacons,
                        label: finish_label(flags, false),
                    });
                }
            }
            AdversaryAction::Truncate { path, after_hop } => {
                let hops = self.hops(path);
                let (chain, times) = self.honest(&hops, start)?;
                let keep = after_hop + 1;
                let rs = chain.receipts()[..keep].to_vec();
                let times = &times[..keep];
                let beacons = self.beacons(path, times);
                let label = self.base_label(&hops[..keep], times, &beacons);
                out.push(SimEntry {
                    name: name.into(),
                    chain: Some(ReceiptChain::from_receipts(rs)),
                    beacons,
                    label,
                });
            }
            AdversaryAction::SybilInsert { path, hop } => {
                let mut hops = self.hops(path);
                let key = RelayKeypair::generate(&mut self.rng);
                let planet = hops[hop.saturating_sub(1).min(hops.len() - 1)].planet;
                hops.insert(hop, Hop { key, relay: None, planet });
                let (chain, times) = self.honest(&hops, start)?;
                let beacons = self.beacons(path, &times);
                let label = self.base_label(&hops, &times, &beacons);
                out.push(SimEntry { name: name.into(), chain: Some(chain), beacons, label });
            }
            AdversaryAction::NonceReuse { path } => {
                let hops = self.hops(path);
                let (first, times_1) = self.honest(&hops, start)?;
                let r0 = &first.receipts()[0];
                let (h, nu) = (r0.h, r0.nu);
                let times_2 = self.times(&hops, start + self.s.action_spacing_seconds / 2)?;
                let second = self.sign_chain(&hops, &times_2, h, nu);
                for (suffix, chain, times) in [("a", first, times_1), ("b", second, times_2)] {
                    let beacons = self.beacons(path, &times);
                    let mut label = self.base_label(&hops, &times, &beacons);
                    label.flags.insert("E1");
                    out.push(SimEntry {
                        name: format!("{name}-{suffix}"),
                        chain: Some(chain),
                        beacons,
                        label: finish_label(label.flags, false),
                    });
                }
            }
            AdversaryAction::Drop { path, after_hop } => {
                // The chain exists up to the dropping hop but is never delivered.
                let hops = self.hops(path);
                self.honest(&hops[..=after_hop], start)?;
                out.push(SimEntry {
                    name: name.into(),
                    chain: None,
                    beacons: Vec::new(),
                    label: ExpectedLabel {
                        delivered: false,
                        compliant: false,
                        assurance: None,
                        flags: BTreeSet::new(),
                    },
                });
            }
        }
        Ok(())
    }

    /// Whether the handoff into hop `i` breaks the same-domain J bound or the
    /// light-time envelope, with the slack the policy engine grants.
    fn handoff_out_of_bounds(
        &self,
        hops: &[Hop],
        times: &[(u64, u64)],
        i: usize,
        beacons: &[BeaconReading],
    ) -> bool {
        if hops[i - 1].relay.is_none() || hops[i].relay.is_none() {
            return false;
        }
        let send = times[i - 1].1;
        let transit = (times[i].0 - send) as f64;
        if hops[i - 1].planet == hops[i].planet {
            return transit > self.s.profile.j_seconds;
        }
        let slack = accepted_beacons(beacons, times, &self.s.profile)
            .iter()
            .map(|b| b.sigma_t_seconds)
            .fold(0.0, f64::max)
            * 2.0;
        match self.s.envelope.window_at(send) {
            None => true,
            Some(w) => transit < w.min_owlt as f64 - slack || transit > w.max_owlt as f64 + slack,
        }
    }
}

fn underflow() -> SimError {
    SimError::ScenarioInvalid("backdate moves a timestamp before the TAI epoch".into())
}

fn tampered<const N: usize>(flags: [&'static str; N]) -> ExpectedLabel {
    finish_label(flags.into_iter().collect(), false)
}

fn finish_label(flags: BTreeSet<&'static str>, non_probative: bool) -> ExpectedLabel {
    let hard = flags.iter().any(|f| !matches!(*f, "P3" | "P4"));
    let assurance = if hard {
        Assurance::Rejected
    } else if non_probative {
        Assurance::NonProbative
    } else if !flags.is_empty() {
        Assurance::Downgraded
    } else {
        Assurance::Full
    };
    ExpectedLabel {
        delivered: true,
        compliant: assurance == Assurance::Full,
        assurance: Some(assurance),
        flags,
    }
}

fn accepted_beacons<'b>(
    beacons: &'b [BeaconReading],
    times: &[(u64, u64)],
    p: &PolicyProfile,
) -> Vec<&'b BeaconReading> {
    let first = times[0].0 as f64;
    let last = times[times.len() - 1].1 as f64;
    beacons
        .iter()
        .filter(|b| {
            let slack = p.j_seconds + 2.0 * b.sigma_t_seconds;
            let t = b.tai.seconds as f64;
            b.sigma_t_seconds <= p.max_beacon_sigma_seconds && t >= first - slack && t <= last + slack
        })
        .collect()
}

/// Round-trips a receipt through its wire bytes, as a splicer copying
/// receipts between chains would.
fn reencode(r: &Receipt) -> Receipt {
    Receipt::decode(&r.encode()).expect("receipt re-decodes")
}

/// Shifts `t_in` and `t_out` of one receipt by editing its encoded bytes,
/// leaving the signature untouched.
fn patch_times(r: &Receipt, seconds: i64) -> Receipt {
    // A7 | 00 58 20 h | 01 50 nu | 02 58 20 node | 03 1B t_in | 04 1B t_out
    const T_IN: usize = 1 + 35 + 18 + 35 + 2;
    const T_OUT: usize = T_IN + 8 + 2;
    let mut bytes = r.encode();
    for at in [T_IN, T_OUT] {
        let v = u64::from_be_bytes(bytes[at..at + 8].try_into().unwrap());
        let shifted = v.saturating_add_signed(seconds);
        bytes[at..at + 8].copy_from_slice(&shifted.to_be_bytes());
    }
    Receipt::decode(&bytes).expect("patched receipt re-decodes")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HeaderInterval {
    Constant(u32),
    /// Exponential inter-block times with this mean, in seconds.
    Exponential(f64),
}

/// Header chain starting at `start_unix` and `start_height`. Headers link by
/// hash but carry no valid proof of work.
pub fn synth_header_chain(
    seed: u64,
    count: usize,
    interval: HeaderInterval,
    start_unix: u32,
    start_height: u64,
) -> Vec<BlockHeader> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut out: Vec<BlockHeader> = Vec::with_capacity(count);
    let mut clock = start_unix as f64;
    for i in 0..count {
        if i > 0 {
            clock += match interval {
                HeaderInterval::Constant(s) => s as f64,
                HeaderInterval::Exponential(mean) => {
                    let u: f64 = rng.gen();
                    -mean * libm::log(1.0 - u)
                }
            };
        }
        let timestamp = libm::floor(clock).min(u32::MAX as f64) as u32;
        let mut raw = [0u8; 80];
        raw[0..4].copy_from_slice(&0x2000_0000u32.to_le_bytes());
        let prev = out.last().map(|h| double_sha256(&h.raw)).unwrap_or(ZERO_PREV);
        raw[4..36].copy_from_slice(&prev);
        rng.fill_bytes(&mut raw[36..68]);
        raw[68..72].copy_from_slice(&timestamp.to_le_bytes());
        raw[72..76].copy_from_slice(&0x1d00_ffffu32.to_le_bytes());
        raw[76..80].copy_from_slice(&rng.next_u32().to_le_bytes());
        out.push(BlockHeader { raw, height: start_height + i as u64, timestamp });
    }
    out
}
