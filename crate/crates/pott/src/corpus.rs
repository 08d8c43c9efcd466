//! Fixture corpora: the directory a simulator run is written to.
//!
//! ```text
//! manifest.pottm            signed allowlist manifest
//! manifest.signer           manifest signer public key, hex
//! profile.txt, envelope.csv
//! expected.json             one label per generated entry
//! headers.bin               when the scenario asks for headers
//! headers.bin.start_height
//! <entry>/chain.pottc       per delivered chain
//! <entry>/receipt-NN.pottr
//! <entry>/beacons.csv
//! <entry>/commitment.pottp
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use pott_core::assess::{assess_chains, Assessment};
use pott_core::policy::{load_manifest, AllowlistManifest, Assurance, PolicyProfile};
use pott_core::privacy::commit_transcript;
use pott_core::sim::{ExpectedLabel, SimOutput};
use pott_core::{BeaconReading, OwltEnvelope, ReceiptChain};

use crate::formats::{self, FormatError};
use crate::scenario::ScenarioFile;

pub const MANIFEST: &str = "manifest.pottm";
pub const SIGNER: &str = "manifest.signer";
pub const PROFILE: &str = "profile.txt";
pub const ENVELOPE: &str = "envelope.csv";
pub const EXPECTED: &str = "expected.json";
pub const HEADERS: &str = "headers.bin";
pub const CHAIN: &str = "chain.pottc";
pub const BEACONS: &str = "beacons.csv";
pub const COMMITMENT: &str = "commitment.pottp";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expected {
    pub scenario: String,
    pub seed: u64,
    pub entries: Vec<LabelRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelRecord {
    pub name: String,
    pub delivered: bool,
    pub compliant: bool,
    pub assurance: Option<String>,
    pub flags: Vec<String>,
}

impl LabelRecord {
    fn from_label(name: &str, l: &ExpectedLabel) -> Self {
        LabelRecord {
            name: name.to_owned(),
            delivered: l.delivered,
            compliant: l.compliant,
            assurance: l.assurance.map(|a| a.as_str().to_owned()),
            flags: l.flags.iter().map(|f| f.to_string()).collect(),
        }
    }

    /// Same semantics as [`ExpectedLabel::matches`].
    pub fn matches(&self, got: Option<&Assessment>) -> bool {
        match got {
            None => !self.delivered,
            Some(a) => {
                let flags: BTreeSet<&str> = a.flags();
                self.delivered
                    && self.compliant == a.compliant()
                    && self.assurance.as_deref() == Some(a.assurance().as_str())
                    && self.flags.iter().all(|f| flags.contains(f.as_str()))
            }
        }
    }
}

pub fn parse_assurance(s: &str) -> Option<Assurance> {
    [Assurance::Rejected, Assurance::NonProbative, Assurance::Downgraded, Assurance::Full]
        .into_iter()
        .find(|a| a.as_str() == s)
}

/// Writes a simulator run. Existing files with the same names are replaced.
pub fn write_corpus(dir: &Path, file: &ScenarioFile, out: &SimOutput) -> Result<(), FormatError> {
    let s = &file.scenario;
    mkdir(dir)?;
    formats::write(&dir.join(MANIFEST), &out.manifest.encode())?;
    formats::write(&dir.join(SIGNER), format!("{}\n", hex::encode(out.manifest.signer.0)).as_bytes())?;
    formats::write(&dir.join(PROFILE), formats::format_profile(&s.profile).as_bytes())?;
    formats::write(&dir.join(ENVELOPE), formats::format_envelope(&s.envelope).as_bytes())?;
    if let Some(headers) = file.header_chain().map_err(FormatError::Invalid)? {
        let path = dir.join(HEADERS);
        formats::write(&path, &formats::encode_headers(&headers))?;
        let sidecar = format!("start_height={}\n", headers[0].height);
        formats::write(&formats::height_sidecar(&path), sidecar.as_bytes())?;
    }
    let mut labels = Vec::new();
    for e in &out.entries {
        labels.push(LabelRecord::from_label(&e.name, &e.label));
        let Some(chain) = &e.chain else { continue };
        let d = dir.join(&e.name);
        mkdir(&d)?;
        formats::write(&d.join(CHAIN), &chain.encode())?;
        for (i, r) in chain.receipts().iter().enumerate() {
            formats::write(&d.join(format!("receipt-{i:02}.pottr")), &r.encode())?;
        }
        formats::write(&d.join(BEACONS), formats::format_beacons(&e.beacons).as_bytes())?;
        if let Ok(cm) = commit_transcript(chain) {
            formats::write(&d.join(COMMITMENT), &cm.encode())?;
        }
    }
    let expected = Expected { scenario: s.name.clone(), seed: s.seed, entries: labels };
    let mut json = serde_json::to_string_pretty(&expected).expect("labels serialize");
    json.push('\n');
    formats::write(&dir.join(EXPECTED), json.as_bytes())
}

fn mkdir(d: &Path) -> Result<(), FormatError> {
    fs::create_dir_all(d).map_err(|source| FormatError::Io { path: d.to_owned(), source })
}

/// A corpus read back from disk.
pub struct Corpus {
    pub dir: PathBuf,
    pub manifest: AllowlistManifest,
    pub profile: PolicyProfile,
    pub envelope: OwltEnvelope,
    pub expected: Expected,
    /// Delivered entries in label order.
    pub chains: Vec<(String, ReceiptChain, Vec<BeaconReading>)>,
}

impl Corpus {
    pub fn load(dir: &Path) -> Result<Self, FormatError> {
        let signer = formats::parse_node_id(&formats::read_text(&dir.join(SIGNER))?)?;
        let manifest = load_manifest(&formats::read(&dir.join(MANIFEST))?, None, Some(&signer))
            .map_err(|e| FormatError::Invalid(e.to_string()))?;
        let profile = formats::parse_profile(&formats::read_text(&dir.join(PROFILE))?)?;
        let envelope = formats::parse_envelope(&formats::read_text(&dir.join(ENVELOPE))?)?;
        let expected: Expected = serde_json::from_str(&formats::read_text(&dir.join(EXPECTED))?)
            .map_err(|e| FormatError::Invalid(format!("{EXPECTED}: {e}")))?;
        let mut chains = Vec::new();
        for l in expected.entries.iter().filter(|l| l.delivered) {
            let (chain, beacons) = load_entry(&dir.join(&l.name))?;
            chains.push((l.name.clone(), chain, beacons));
        }
        Ok(Corpus { dir: dir.to_owned(), manifest, profile, envelope, expected, chains })
    }

    /// Assesses every delivered chain together, so nonce reuse across
    /// entries is visible.
    pub fn assess(&self) -> Result<Vec<Option<Assessment>>, FormatError> {
        let set: Vec<_> = self.chains.iter().map(|(_, c, b)| (c.clone(), b.clone())).collect();
        assess_chains(&set, &self.manifest, &self.profile, &self.envelope)
            .map_err(|e| FormatError::Invalid(e.to_string()))
    }

    /// `(label, assessment, matches)` for every entry, undelivered ones
    /// included.
    pub fn check_labels(&self) -> Result<Vec<(LabelRecord, Option<Assessment>, bool)>, FormatError> {
        let mut got = self.assess()?.into_iter();
        Ok(self
            .expected
            .entries
            .iter()
            .map(|l| {
                let a = if l.delivered { got.next().flatten() } else { None };
                let ok = l.matches(a.as_ref());
                (l.clone(), a, ok)
            })
            .collect())
    }
}

/// Reads `chain.pottc` and `beacons.csv` from an entry directory.
pub fn load_entry(d: &Path) -> Result<(ReceiptChain, Vec<BeaconReading>), FormatError> {
    let chain = decode_chain(&d.join(CHAIN))?;
    let beacons = formats::parse_beacons(&formats::read_text(&d.join(BEACONS))?)?;
    Ok((chain, beacons))
}

pub fn decode_chain(path: &Path) -> Result<ReceiptChain, FormatError> {
    ReceiptChain::decode(&formats::read(path)?)
        .map_err(|e| FormatError::Invalid(format!("{}: {e}", path.display())))
}
