//! TOML scenario files for the simulator.
//!
//! ```toml
//! name = "honest"
//! seed = 1
//! start_tai = 2080000000
//!
//! [[relays]]
//! operator = "dsn"
//! planet = "earth"
//!
//! [[paths]]
//! relays = [0, 1, 2]
//! beacons = [0, 1]
//!
//! [[actions]]
//! kind = "honest"
//! path = 0
//! ```

use serde::Deserialize;

use pott_core::anchor::BlockHeader;
use pott_core::policy::{PolicyProfile, DEFAULT_TTL_HOURS};
use pott_core::sim::{
    synth_header_chain, AdversaryAction, BeaconSpec, HeaderInterval, JitterModel, PathSpec,
    RelaySpec, Scenario,
};
use pott_core::timebase::{tai_to_unix_utc, OwltEnvelope, OwltWindow};
use pott_core::{DigestKind, LeapSecondTable, PlanetaryDomain, TaiTimestamp};

use crate::formats::set_profile_knob;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct File {
    name: String,
    seed: u64,
    start_tai: u64,
    #[serde(default = "one_day")]
    action_spacing_seconds: u64,
    #[serde(default = "generic")]
    payload_kind: String,
    #[serde(default = "default_ttl")]
    manifest_ttl_hours: u64,
    #[serde(default)]
    profile: toml::Table,
    jitter: Option<Jitter>,
    relays: Vec<Relay>,
    #[serde(default)]
    beacons: Vec<Beacon>,
    #[serde(default)]
    paths: Vec<Path>,
    #[serde(default)]
    envelope: Vec<Window>,
    #[serde(default)]
    actions: Vec<Action>,
    headers: Option<Headers>,
}

fn one_day() -> u64 {
    86_400
}

fn generic() -> String {
    "generic".into()
}

fn default_ttl() -> u64 {
    DEFAULT_TTL_HOURS
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Jitter {
    min_seconds: u64,
    max_seconds: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Relay {
    operator: String,
    planet: String,
    #[serde(default)]
    revoked: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Beacon {
    id: String,
    domain: String,
    sigma_t_seconds: f64,
    #[serde(default)]
    excursion_seconds: i64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Path {
    relays: Vec<usize>,
    #[serde(default)]
    beacons: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Window {
    start_tai: u64,
    end_tai: u64,
    min_owlt: u64,
    max_owlt: u64,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum Action {
    Honest { path: usize },
    Splice { a: usize, b: usize, cut: usize },
    Backdate {
        path: usize,
        hop: usize,
        seconds: i64,
        #[serde(default)]
        resigned: bool,
    },
    Truncate { path: usize, after_hop: usize },
    Sybil { path: usize, hop: usize },
    NonceReuse { path: usize },
    Drop { path: usize, after_hop: usize },
}

/// Synthetic header chain written next to the corpus.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Headers {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_interval")]
    pub mean_interval_seconds: f64,
    /// `"exponential"` or `"constant"`.
    #[serde(default = "exponential")]
    pub distribution: String,
    /// Defaults to six hours before the scenario start.
    pub start_unix: Option<u32>,
    #[serde(default = "default_height")]
    pub start_height: u64,
}

fn default_count() -> usize {
    288
}

fn default_interval() -> f64 {
    600.0
}

fn exponential() -> String {
    "exponential".into()
}

fn default_height() -> u64 {
    800_000
}

/// A parsed scenario file.
#[derive(Debug, Clone)]
pub struct ScenarioFile {
    pub scenario: Scenario,
    pub headers: Option<Headers>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, String> {
        let f: File = toml::from_str(text).map_err(|e| e.to_string())?;
        let planet = |s: &str| PlanetaryDomain::parse(s).ok_or_else(|| format!("unknown planet {s:?}"));

        let mut profile = PolicyProfile::default();
        for (k, v) in &f.profile {
            let v = match v {
                toml::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            set_profile_knob(&mut profile, k, &v)?;
        }
        let jitter = match f.jitter {
            Some(j) => JitterModel::Uniform { min_seconds: j.min_seconds, max_seconds: j.max_seconds },
            None => Scenario::default_jitter(&profile),
        };
        let relays = f
            .relays
            .iter()
            .map(|r| Ok(RelaySpec { operator: r.operator.clone(), planet: planet(&r.planet)?, revoked: r.revoked }))
            .collect::<Result<_, String>>()?;
        let beacons = f
            .beacons
            .iter()
            .map(|b| {
                Ok(BeaconSpec {
                    id: b.id.clone(),
                    domain: planet(&b.domain)?,
                    sigma_t_seconds: b.sigma_t_seconds,
                    excursion_seconds: b.excursion_seconds,
                })
            })
            .collect::<Result<_, String>>()?;
        let envelope = OwltEnvelope::new(
            f.envelope
                .iter()
                .map(|w| OwltWindow {
                    start_tai: w.start_tai,
                    end_tai: w.end_tai,
                    min_owlt: w.min_owlt,
                    max_owlt: w.max_owlt,
                })
                .collect(),
        )
        .map_err(|e| e.to_string())?;
        let adversary = f
            .actions
            .iter()
            .map(|a| match *a {
                Action::Honest { path } => AdversaryAction::Honest { path },
                Action::Splice { a, b, cut } => AdversaryAction::Splice { a, b, cut },
                Action::Backdate { path, hop, seconds, resigned } => {
                    AdversaryAction::Backdate { path, hop, seconds, resigned }
                }
                Action::Truncate { path, after_hop } => AdversaryAction::Truncate { path, after_hop },
                Action::Sybil { path, hop } => AdversaryAction::SybilInsert { path, hop },
                Action::NonceReuse { path } => AdversaryAction::NonceReuse { path },
                Action::Drop { path, after_hop } => AdversaryAction::Drop { path, after_hop },
            })
            .collect();
        let payload_kind = DigestKind::parse(&f.payload_kind)
            .ok_or_else(|| format!("unknown payload_kind {:?}", f.payload_kind))?;
        if let Some(h) = &f.headers {
            if h.count == 0 {
                return Err("headers.count must be at least 1".into());
            }
            if !(h.mean_interval_seconds.is_finite() && h.mean_interval_seconds > 0.0) {
                return Err("headers.mean_interval_seconds must be positive".into());
            }
            if !matches!(h.distribution.as_str(), "exponential" | "constant") {
                return Err(format!("unknown header distribution {:?}", h.distribution));
            }
        }

        Ok(ScenarioFile {
            scenario: Scenario {
                name: f.name,
                seed: f.seed,
                start_tai: f.start_tai,
                action_spacing_seconds: f.action_spacing_seconds,
                relays,
                paths: f.paths.into_iter().map(|p| PathSpec { relays: p.relays, beacons: p.beacons }).collect(),
                beacons,
                envelope,
                profile,
                jitter,
                payload_kind,
                manifest_ttl_hours: f.manifest_ttl_hours,
                adversary,
            },
            headers: f.headers,
        })
    }

    /// Header chain seeded from the scenario seed.
    pub fn header_chain(&self) -> Result<Option<Vec<BlockHeader>>, String> {
        let Some(h) = &self.headers else { return Ok(None) };
        let start_unix = match h.start_unix {
            Some(s) => s,
            None => {
                let t = TaiTimestamp::from_seconds(self.scenario.start_tai);
                let unix = tai_to_unix_utc(t, &LeapSecondTable::builtin()).map_err(|e| e.to_string())?;
                u32::try_from(unix - 6 * 3600).map_err(|_| "start_tai outside header time range".to_string())?
            }
        };
        let interval = match h.distribution.as_str() {
            "constant" => HeaderInterval::Constant(h.mean_interval_seconds as u32),
            _ => HeaderInterval::Exponential(h.mean_interval_seconds),
        };
        Ok(Some(synth_header_chain(self.scenario.seed, h.count, interval, start_unix, h.start_height)))
    }
}
