//! Full evaluation of a set of delivered chains: structure, policy, and
//! nonce reuse across the set.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use crate::policy::{check_profile, AllowlistManifest, Assurance, PolicyError, PolicyProfile, PolicyVerdict};
use crate::receipt::ReceiptChain;
use crate::timebase::{BeaconReading, OwltEnvelope};
use crate::verifier::{evidence_sets, nonce_reuse, verify_structure, VerificationReport};

/// Id used for nonce reuse findings.
pub const NONCE_REUSE: &str = "E1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assessment {
    pub report: VerificationReport,
    pub verdict: PolicyVerdict,
    /// Another chain in the set shares `(h, nu)` with a different origin.
    pub nonce_reused: bool,
}

impl Assessment {
    /// Rule, check and `E1` ids reported for this chain.
    pub fn flags(&self) -> BTreeSet<&'static str> {
        let mut f: BTreeSet<&'static str> = self.report.rules_failed().iter().map(|r| r.id()).collect();
        f.extend(self.verdict.checks_failed().iter().map(|c| c.id()));
        if self.nonce_reused {
            f.insert(NONCE_REUSE);
        }
        f
    }

    pub fn assurance(&self) -> Assurance {
        if self.nonce_reused {
            Assurance::Rejected
        } else {
            self.verdict.assurance
        }
    }

    pub fn compliant(&self) -> bool {
        self.assurance() == Assurance::Full
    }
}

/// Assesses each `(chain, beacons)` pair. Empty chains yield `None`.
pub fn assess_chains(
    chains: &[(ReceiptChain, Vec<BeaconReading>)],
    manifest: &AllowlistManifest,
    profile: &PolicyProfile,
    env: &OwltEnvelope,
) -> Result<Vec<Option<Assessment>>, PolicyError> {
    let allow = manifest.allowlist();
    let all: Vec<ReceiptChain> = chains.iter().map(|(c, _)| c.clone()).collect();
    let reused: BTreeSet<_> = nonce_reuse(&evidence_sets(&all)).into_iter().collect();
    chains
        .iter()
        .map(|(chain, beacons)| {
            let Ok(report) = verify_structure(chain, &allow) else {
                return Ok(None);
            };
            let verdict = check_profile(&report, chain, manifest, profile, env, beacons)?;
            let nonce_reused = reused.contains(&report.evidence_key);
            Ok(Some(Assessment { report, verdict, nonce_reused }))
        })
        .collect()
}
