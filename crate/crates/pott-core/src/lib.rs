//! Proof-of-transit timestamping (PoTT).
//!
//! Relays that take custody of a payload append signed, hash-chained receipts
//! recording ingress and egress times. This crate holds everything that does
//! not touch the filesystem: the canonical receipt codec, BIP-340 signing,
//! structural chain verification, the policy engine, Bitcoin
//! MedianTimePast adjudication, Lightning timelock and link-budget math,
//! commit-and-reveal transcripts, and a deterministic scenario simulator.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod anchor;
pub mod assess;
pub mod cbor;
pub mod digest;
pub mod latency;
pub mod policy;
pub mod privacy;
pub mod receipt;
pub mod signing;
pub mod sim;
pub mod timebase;
pub mod verifier;

pub use digest::{compute_payload_digest, DigestKind, PayloadDigest, PayloadHash};
pub use receipt::{
    append_hop, decode_receipt, encode_receipt, link_hash, originate_chain, signing_message,
    Nonce, Receipt, ReceiptChain,
};
pub use signing::{sign_receipt, verify_signature, NodeId, RelayKeypair};
pub use timebase::{BeaconReading, LeapSecondTable, OwltEnvelope, PlanetaryDomain, TaiTimestamp};
pub use verifier::{evidence_sets, verify_structure, VerificationReport};

