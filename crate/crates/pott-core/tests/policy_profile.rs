//! Policy profile checks over hand-built chains.

mod common;

use std::collections::BTreeSet;

use pott_core::policy::{
    check_high_stakes, check_profile, AllowlistManifest, Assurance, Check, ManifestEntry,
    PolicyError, PolicyProfile, PolicyVerdict,
};
use pott_core::timebase::OwltWindow;
use pott_core::{
    compute_payload_digest, originate_chain, verify_structure, BeaconReading, DigestKind,
    OwltEnvelope, PlanetaryDomain, ReceiptChain, RelayKeypair, TaiTimestamp,
};

const T0: u64 = 2_080_000_000;

struct World {
    keys: Vec<RelayKeypair>,
    manifest: AllowlistManifest,
    env: OwltEnvelope,
}

/// Relays 0..n; `ops[i]` and `planets[i]` describe relay i.
fn world(ops: &[&str], planets: &[PlanetaryDomain], revoked: &[usize]) -> World {
    let mut rng = common::rng(42);
    let signer = RelayKeypair::generate(&mut rng);
    let keys = common::keys(ops.len(), &mut rng);
    let entries = keys
        .iter()
        .zip(ops.iter().zip(planets))
        .map(|(k, (o, p))| ManifestEntry { node: k.public(), operator: o.to_string(), planet: *p })
        .collect();
    let revoked = revoked.iter().map(|&i| keys[i].public()).collect();
    let manifest =
        AllowlistManifest::new_signed(1, entries, revoked, TaiTimestamp::from_seconds(T0), 72, &signer)
            .unwrap();
    let env = OwltEnvelope::new(vec![OwltWindow {
        start_tai: T0 - 86_400,
        end_tai: T0 + 86_400,
        min_owlt: 180,
        max_owlt: 1320,
    }])
    .unwrap();
    World { keys, manifest, env }
}

/// Chain over relays `path` with explicit `(t_in, t_out)` offsets from T0.
fn chain_with(w: &World, path: &[usize], times: &[(u64, u64)], seed: u64) -> ReceiptChain {
    let mut rng = common::rng(seed);
    let t = |s: u64| TaiTimestamp::from_seconds(T0 + s);
    let d = compute_payload_digest(b"payload", DigestKind::Generic).unwrap();
    let mut c = originate_chain(&d, &w.keys[path[0]], t(times[0].0), t(times[0].1), &mut rng).unwrap();
    for (&r, &(a, b)) in path.iter().zip(times).skip(1) {
        c = c.append_hop(&w.keys[r], t(a), t(b)).unwrap();
    }
    c
}

/// Same-planet hops 60 s apart, 30 s dwell.
fn local_times(n: usize) -> Vec<(u64, u64)> {
    (0..n as u64).map(|i| (60 * i, 60 * i + 30)).collect()
}

fn beacon(id: &str, domain: PlanetaryDomain, at: u64, sigma: f64) -> BeaconReading {
    BeaconReading {
        beacon_id: id.into(),
        domain,
        tai: TaiTimestamp::from_seconds(T0 + at),
        sigma_t_seconds: sigma,
    }
}

fn verdict(w: &World, c: &ReceiptChain, beacons: &[BeaconReading], p: &PolicyProfile) -> PolicyVerdict {
    let rep = verify_structure(c, &w.manifest.allowlist()).unwrap();
    check_profile(&rep, c, &w.manifest, p, &w.env, beacons).unwrap()
}

fn checks(v: &PolicyVerdict) -> BTreeSet<Check> {
    v.checks_failed()
}

use PlanetaryDomain::{Earth, Mars};

fn earth_mars() -> World {
    world(&["alpha", "beta", "gamma"], &[Earth, Earth, Mars], &[])
}

fn both_beacons() -> Vec<BeaconReading> {
    vec![beacon("earth-utc", Earth, 500, 1.0), beacon("mars-mtc", Mars, 900, 30.0)]
}

#[test]
fn three_hop_two_operator_compliant() {
    let w = earth_mars();
    // Earth -> Earth 60 s, Earth -> Mars 600 s transit.
    let c = chain_with(&w, &[0, 1, 2], &[(0, 30), (90, 120), (720, 800)], 1);
    assert_eq!(c.receipts_encoded_len(), 633);
    let v = verdict(&w, &c, &both_beacons(), &PolicyProfile::default());
    assert!(v.compliant, "{v:?}");
    assert_eq!(v.assurance, Assurance::Full);
    assert_eq!(v.anchors, vec!["earth-utc".to_string(), "mars-mtc".to_string()]);
}

#[test]
fn thirty_three_hops_trip_hop_cap() {
    let ops: Vec<&str> = (0..33).map(|i| if i % 2 == 0 { "alpha" } else { "beta" }).collect();
    let w = world(&ops, &[Earth; 33], &[]);
    let path: Vec<usize> = (0..33).collect();
    let c = chain_with(&w, &path, &local_times(33), 2);
    let v = verdict(&w, &c, &[beacon("e", Earth, 100, 1.0)], &PolicyProfile::default());
    assert_eq!(checks(&v), BTreeSet::from([Check::P6]));
    // 33 * 211 = 6963 bytes stays under the byte cap.
    assert_eq!(v.violations.len(), 1, "{v:?}");
    assert_eq!(v.violations[0].detail, "33 hops exceeds cap 32");
    assert_eq!(v.assurance, Assurance::Rejected);
}

#[test]
fn byte_cap_alone() {
    let w = world(&["alpha", "beta"], &[Earth, Earth], &[]);
    let c = chain_with(&w, &[0, 1, 0], &local_times(3), 3);
    let p = PolicyProfile { max_chain_bytes: 600, ..Default::default() };
    let v = verdict(&w, &c, &[beacon("e", Earth, 60, 1.0)], &p);
    assert_eq!(checks(&v), BTreeSet::from([Check::P6]));
    assert!(v.violations[0].detail.contains("633 bytes"));
}

#[test]
fn two_hops_fail_minimum() {
    let w = earth_mars();
    let c = chain_with(&w, &[0, 1], &local_times(2), 4);
    let v = verdict(&w, &c, &both_beacons(), &PolicyProfile::default());
    assert_eq!(checks(&v), BTreeSet::from([Check::P2]));
    assert!(!v.compliant);
    assert_eq!(v.assurance, Assurance::Rejected);
}

#[test]
fn single_operator_without_beacons_is_non_probative() {
    let w = world(&["solo", "solo", "solo"], &[Earth; 3], &[]);
    let c = chain_with(&w, &[0, 1, 2], &local_times(3), 5);
    let v = verdict(&w, &c, &[], &PolicyProfile::default());
    assert_eq!(checks(&v), BTreeSet::from([Check::P3, Check::P4]));
    assert_eq!(v.assurance, Assurance::NonProbative);
}

#[test]
fn single_operator_with_anchor_is_downgraded() {
    let w = world(&["solo", "solo", "solo"], &[Earth; 3], &[]);
    let c = chain_with(&w, &[0, 1, 2], &local_times(3), 6);
    let v = verdict(&w, &c, &[beacon("e", Earth, 60, 1.0)], &PolicyProfile::default());
    assert_eq!(checks(&v), BTreeSet::from([Check::P3]));
    assert_eq!(v.assurance, Assurance::Downgraded);
}

#[test]
fn missing_planet_anchor_is_downgraded() {
    let w = earth_mars();
    let c = chain_with(&w, &[0, 1, 2], &[(0, 30), (90, 120), (720, 800)], 7);
    let v = verdict(&w, &c, &[beacon("e", Earth, 60, 1.0)], &PolicyProfile::default());
    assert_eq!(checks(&v), BTreeSet::from([Check::P4]));
    assert!(v.violations[0].detail.contains("mars"));
    assert_eq!(v.assurance, Assurance::Downgraded);
}

#[test]
fn beacon_sigma_and_window() {
    let w = earth_mars();
    let c = chain_with(&w, &[0, 1, 2], &[(0, 30), (90, 120), (720, 800)], 8);
    let p = PolicyProfile::default();
    let loose = [beacon("e", Earth, 60, 61.0), beacon("m", Mars, 700, 30.0)];
    assert_eq!(checks(&verdict(&w, &c, &loose, &p)), BTreeSet::from([Check::P4]));
    // Window: [0 - (3600 + 2), 800 + (3600 + 2)].
    let edge = [beacon("e", Earth, 4402, 1.0), beacon("m", Mars, 700, 30.0)];
    assert!(verdict(&w, &c, &edge, &p).compliant);
    let past = [beacon("e", Earth, 4403, 1.0), beacon("m", Mars, 700, 30.0)];
    assert_eq!(checks(&verdict(&w, &c, &past, &p)), BTreeSet::from([Check::P4]));
}

#[test]
fn dwell_over_j() {
    let w = earth_mars();
    let c = chain_with(&w, &[0, 1, 2], &[(0, 3601), (3660, 3700), (4300, 4400)], 9);
    let beacons = [beacon("e", Earth, 2000, 1.0), beacon("m", Mars, 2000, 30.0)];
    let v = verdict(&w, &c, &beacons, &PolicyProfile::default());
    assert_eq!(checks(&v), BTreeSet::from([Check::P5]));
    assert!(v.violations[0].detail.starts_with("hop 0"));
}

#[test]
fn cross_domain_transit_outside_envelope() {
    let w = earth_mars();
    let beacons = both_beacons();
    let p = PolicyProfile::default();
    // 10 s Earth -> Mars is faster than light allows.
    let fast = chain_with(&w, &[0, 1, 2], &[(0, 30), (90, 120), (130, 200)], 10);
    assert_eq!(checks(&verdict(&w, &fast, &beacons, &p)), BTreeSet::from([Check::P5]));
    // Slack is twice the largest accepted sigma (30 s): 1320 + 60 passes, +61 fails.
    let edge = chain_with(&w, &[0, 1, 2], &[(0, 30), (90, 120), (1500, 1600)], 11);
    assert!(verdict(&w, &edge, &beacons, &p).compliant);
    let late = chain_with(&w, &[0, 1, 2], &[(0, 30), (90, 120), (1501, 1600)], 12);
    assert_eq!(checks(&verdict(&w, &late, &beacons, &p)), BTreeSet::from([Check::P5]));
}

#[test]
fn revoked_node_always_trips_p7() {
    let w = world(&["alpha", "beta", "gamma"], &[Earth; 3], &[1]);
    let c = chain_with(&w, &[0, 1, 2], &local_times(3), 13);
    let v = verdict(&w, &c, &[beacon("e", Earth, 60, 1.0)], &PolicyProfile::default());
    assert!(checks(&v).contains(&Check::P7));
    assert!(checks(&v).contains(&Check::P1));
    assert_eq!(v.assurance, Assurance::Rejected);
}

#[test]
fn tampered_manifest_is_an_error() {
    let mut w = earth_mars();
    let c = chain_with(&w, &[0, 1, 2], &[(0, 30), (90, 120), (720, 800)], 14);
    let rep = verify_structure(&c, &w.manifest.allowlist()).unwrap();
    w.manifest.entries[0].operator = "mallory".into();
    let r = check_profile(&rep, &c, &w.manifest, &PolicyProfile::default(), &w.env, &[]);
    assert_eq!(r, Err(PolicyError::ManifestSignatureInvalid));
}

#[test]
fn new_operator_hop_never_lowers_assurance() {
    let w = world(&["solo", "solo", "solo", "other"], &[Earth; 4], &[]);
    let p = PolicyProfile::default();
    let b = [beacon("e", Earth, 60, 1.0)];
    for beacons in [&b[..], &[]] {
        for n in 1..=3 {
            let path: Vec<usize> = (0..n).collect();
            let before = verdict(&w, &chain_with(&w, &path, &local_times(n), 15), beacons, &p);
            let mut longer = path.clone();
            longer.push(3);
            let after = verdict(&w, &chain_with(&w, &longer, &local_times(n + 1), 15), beacons, &p);
            assert!(after.assurance >= before.assurance, "{n} hops: {before:?} -> {after:?}");
        }
    }
}

/// Copies of one payload instance: a shared origin, then different relays.
fn forks(w: &World, tails: &[&[usize]]) -> Vec<ReceiptChain> {
    let base = chain_with(w, &[0], &[(0, 30)], 16);
    let t = |s: u64| TaiTimestamp::from_seconds(T0 + s);
    tails
        .iter()
        .map(|tail| {
            let mut c = base.clone();
            for (i, &r) in tail.iter().enumerate() {
                let s = 60 * (i as u64 + 1);
                c = c.append_hop(&w.keys[r], t(s), t(s + 30)).unwrap();
            }
            c
        })
        .collect()
}

#[test]
fn high_stakes_needs_disjoint_operators() {
    let w = world(&["origin", "a1", "a2", "b1", "b2", "a3"], &[Earth; 6], &[]);
    let p = PolicyProfile::default();
    let b = [beacon("e", Earth, 60, 1.0)];
    let judge = |c: ReceiptChain| {
        let v = verdict(&w, &c, &b, &p);
        assert!(v.compliant, "{v:?}");
        (c, v)
    };
    let [x, y, z]: [ReceiptChain; 3] = forks(&w, &[&[1, 2], &[3, 4], &[5, 4]]).try_into().unwrap();
    let (x, y, z) = (judge(x), judge(y), judge(z));

    // Beacon ids only count as a regime when both chains carry them; here
    // they share one, so switch the check off by clearing anchors.
    let strip = |(c, mut v): (ReceiptChain, PolicyVerdict)| {
        v.anchors.clear();
        (c, v)
    };
    let sets = [strip(x.clone()), strip(y.clone())];
    assert!(check_high_stakes(&sets, &w.manifest, &p).unwrap());
    // Same beacon id on both: regimes overlap.
    assert!(!check_high_stakes(&[x.clone(), y.clone()], &w.manifest, &p).unwrap());
    // z shares relay operator b2 with y, and a-operators differ by name from x.
    let sets = [strip(y.clone()), strip(z.clone())];
    assert!(!check_high_stakes(&sets, &w.manifest, &p).unwrap());
    assert!(!check_high_stakes(&[strip(x.clone())], &w.manifest, &p).unwrap());
    let sets = [strip(x), strip(y), strip(z)];
    assert!(check_high_stakes(&sets, &w.manifest, &p).unwrap());
}

#[test]
fn high_stakes_rejects_mixed_payloads() {
    let w = world(&["a", "b", "c"], &[Earth; 3], &[]);
    let p = PolicyProfile::default();
    let c1 = chain_with(&w, &[0, 1, 2], &local_times(3), 17);
    let mut rng = common::rng(18);
    let c2 = common::chain(&w.keys, b"other payload", T0, &mut rng);
    let v = verdict(&w, &c1, &[], &p);
    let sets = [(c1, v.clone()), (c2, v)];
    assert_eq!(check_high_stakes(&sets, &w.manifest, &p), Err(PolicyError::MixedPayload));
}
