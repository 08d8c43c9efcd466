#![allow(dead_code)]

use std::collections::BTreeSet;

use pott_core::{
    compute_payload_digest, originate_chain, DigestKind, NodeId, ReceiptChain, RelayKeypair,
    TaiTimestamp,
};
use rand_core::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub fn rng(seed: u64) -> Xoshiro256PlusPlus {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

pub fn keys(n: usize, rng: &mut Xoshiro256PlusPlus) -> Vec<RelayKeypair> {
    (0..n).map(|_| RelayKeypair::generate(rng)).collect()
}

pub fn allow(keys: &[RelayKeypair]) -> BTreeSet<NodeId> {
    keys.iter().map(|k| k.public()).collect()
}

/// Honest chain over `keys`, hop `i` holding custody for 10 s starting at
/// `start + 100 i`.
pub fn chain(keys: &[RelayKeypair], payload: &[u8], start: u64, rng: &mut Xoshiro256PlusPlus) -> ReceiptChain {
    let t = TaiTimestamp::from_seconds;
    let d = compute_payload_digest(payload, DigestKind::Generic).unwrap();
    let mut c = originate_chain(&d, &keys[0], t(start), t(start + 10), rng).unwrap();
    for (i, k) in keys.iter().enumerate().skip(1) {
        let s = start + 100 * i as u64;
        c = c.append_hop(k, t(s), t(s + 10)).unwrap();
    }
    c
}
