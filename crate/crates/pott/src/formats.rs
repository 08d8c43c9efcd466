//! On-disk formats: leap-second tables, OWLT envelopes, policy profiles,
//! beacon readings, header files and key files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pott_core::anchor::{parse_header, BlockHeader, HEADER_LEN};
use pott_core::policy::PolicyProfile;
use pott_core::signing::NodeId;
use pott_core::timebase::{LeapEntry, LeapSecondTable, OwltEnvelope, OwltWindow, TimeError};
use pott_core::{BeaconReading, PlanetaryDomain, RelayKeypair, TaiTimestamp};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{what} line {line}: {why}")]
    Line { what: &'static str, line: usize, why: String },
    #[error("{0}")]
    Invalid(String),
}

pub fn read(path: &Path) -> Result<Vec<u8>, FormatError> {
    fs::read(path).map_err(|source| FormatError::Io { path: path.to_owned(), source })
}

pub fn read_text(path: &Path) -> Result<String, FormatError> {
    fs::read_to_string(path).map_err(|source| FormatError::Io { path: path.to_owned(), source })
}

pub fn write(path: &Path, bytes: &[u8]) -> Result<(), FormatError> {
    fs::write(path, bytes).map_err(|source| FormatError::Io { path: path.to_owned(), source })
}

/// Non-empty lines with `#` comments stripped, numbered from 1.
fn lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

fn field<T: std::str::FromStr>(
    what: &'static str,
    line: usize,
    name: &str,
    raw: Option<&str>,
) -> Result<T, FormatError> {
    let raw = raw.map(str::trim).ok_or_else(|| FormatError::Line {
        what,
        line,
        why: format!("missing {name}"),
    })?;
    raw.parse().map_err(|_| FormatError::Line { what, line, why: format!("bad {name} {raw:?}") })
}

/// `unix_effective offset` per line.
pub fn parse_leap_seconds(text: &str) -> Result<LeapSecondTable, FormatError> {
    const WHAT: &str = "leap-second table";
    let mut entries = Vec::new();
    for (n, l) in lines(text) {
        let mut it = l.split_whitespace();
        let effective_unix = field(WHAT, n, "effective instant", it.next())?;
        let tai_minus_utc = field(WHAT, n, "offset", it.next())?;
        if it.next().is_some() {
            return Err(FormatError::Line { what: WHAT, line: n, why: "trailing fields".into() });
        }
        entries.push(LeapEntry { effective_unix, tai_minus_utc });
    }
    LeapSecondTable::new(entries).map_err(time_err)
}

pub fn format_leap_seconds(table: &LeapSecondTable) -> String {
    let mut s = String::from("# unix_effective tai_minus_utc\n");
    for e in table.entries() {
        let _ = writeln!(s, "{} {}", e.effective_unix, e.tai_minus_utc);
    }
    s
}

const ENVELOPE_HEADER: &str = "start_tai,end_tai,min_owlt,max_owlt";

pub fn parse_envelope(text: &str) -> Result<OwltEnvelope, FormatError> {
    const WHAT: &str = "OWLT envelope";
    let mut windows = Vec::new();
    for (n, l) in lines(text) {
        if l.starts_with("start_tai") {
            continue;
        }
        let mut it = l.split(',');
        let w = OwltWindow {
            start_tai: field(WHAT, n, "start_tai", it.next())?,
            end_tai: field(WHAT, n, "end_tai", it.next())?,
            min_owlt: field(WHAT, n, "min_owlt", it.next())?,
            max_owlt: field(WHAT, n, "max_owlt", it.next())?,
        };
        if it.next().is_some() {
            return Err(FormatError::Line { what: WHAT, line: n, why: "expected 4 columns".into() });
        }
        windows.push(w);
    }
    OwltEnvelope::new(windows).map_err(time_err)
}

pub fn format_envelope(env: &OwltEnvelope) -> String {
    let mut s = format!("{ENVELOPE_HEADER}\n");
    for w in env.windows() {
        let _ = writeln!(s, "{},{},{},{}", w.start_tai, w.end_tai, w.min_owlt, w.max_owlt);
    }
    s
}

fn time_err(e: TimeError) -> FormatError {
    FormatError::Invalid(e.to_string())
}

/// Applies one `key=value` knob. Keys are the profile field names;
/// `J_seconds` is accepted for `j_seconds`.
pub fn set_profile_knob(p: &mut PolicyProfile, key: &str, value: &str) -> Result<(), String> {
    fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
        v.parse().map_err(|_| format!("bad value {v:?} for {key}"))
    }
    match key {
        "min_hops" => p.min_hops = num(key, value)?,
        "min_operator_domains" => p.min_operator_domains = num(key, value)?,
        "require_anchor_per_planetary_domain" => {
            p.require_anchor_per_planetary_domain = num(key, value)?
        }
        "j_seconds" | "J_seconds" => p.j_seconds = num(key, value)?,
        "max_beacon_sigma_seconds" => p.max_beacon_sigma_seconds = num(key, value)?,
        "max_hops" => p.max_hops = num(key, value)?,
        "max_chain_bytes" => p.max_chain_bytes = num(key, value)?,
        "high_stakes_min_diverse_chains" => p.high_stakes_min_diverse_chains = num(key, value)?,
        "retention_days" => p.retention_days = num(key, value)?,
        _ => return Err(format!("unknown profile knob {key:?}")),
    }
    Ok(())
}

/// Unlisted knobs keep their defaults.
pub fn parse_profile(text: &str) -> Result<PolicyProfile, FormatError> {
    let mut p = PolicyProfile::default();
    for (n, l) in lines(text) {
        let (k, v) = l.split_once('=').ok_or_else(|| FormatError::Line {
            what: "profile",
            line: n,
            why: "expected key=value".into(),
        })?;
        set_profile_knob(&mut p, k.trim(), v.trim())
            .map_err(|why| FormatError::Line { what: "profile", line: n, why })?;
    }
    p.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(p)
}

pub fn format_profile(p: &PolicyProfile) -> String {
    format!(
        "min_hops={}\nmin_operator_domains={}\nrequire_anchor_per_planetary_domain={}\n\
         j_seconds={}\nmax_beacon_sigma_seconds={}\nmax_hops={}\nmax_chain_bytes={}\n\
         high_stakes_min_diverse_chains={}\nretention_days={}\n",
        p.min_hops,
        p.min_operator_domains,
        p.require_anchor_per_planetary_domain,
        p.j_seconds,
        p.max_beacon_sigma_seconds,
        p.max_hops,
        p.max_chain_bytes,
        p.high_stakes_min_diverse_chains,
        p.retention_days
    )
}

const BEACON_HEADER: &str = "beacon_id,domain,tai_seconds,tai_frac,sigma_t_seconds";

/// CSV with columns `beacon_id,domain,tai_seconds,tai_frac,sigma_t_seconds`.
/// An empty `tai_frac` means no fine field.
pub fn parse_beacons(text: &str) -> Result<Vec<BeaconReading>, FormatError> {
    const WHAT: &str = "beacons";
    let mut out = Vec::new();
    for (n, l) in lines(text) {
        if l.starts_with("beacon_id") {
            continue;
        }
        let cols: Vec<&str> = l.split(',').map(str::trim).collect();
        if cols.len() != 5 {
            return Err(FormatError::Line { what: WHAT, line: n, why: "expected 5 columns".into() });
        }
        let domain = PlanetaryDomain::parse(cols[1]).ok_or_else(|| FormatError::Line {
            what: WHAT,
            line: n,
            why: format!("unknown domain {:?}", cols[1]),
        })?;
        let seconds = field(WHAT, n, "tai_seconds", Some(cols[2]))?;
        let frac = match cols[3] {
            "" => None,
            f => Some(field(WHAT, n, "tai_frac", Some(f))?),
        };
        let sigma: f64 = field(WHAT, n, "sigma_t_seconds", Some(cols[4]))?;
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(FormatError::Line { what: WHAT, line: n, why: "sigma must be >= 0".into() });
        }
        out.push(BeaconReading {
            beacon_id: cols[0].to_owned(),
            domain,
            tai: TaiTimestamp { seconds, frac },
            sigma_t_seconds: sigma,
        });
    }
    Ok(out)
}

pub fn format_beacons(bs: &[BeaconReading]) -> String {
    let mut s = format!("{BEACON_HEADER}\n");
    for b in bs {
        let frac = b.tai.frac.map(|f| f.to_string()).unwrap_or_default();
        let _ =
            writeln!(s, "{},{},{},{},{}", b.beacon_id, b.domain, b.tai.seconds, frac, b.sigma_t_seconds);
    }
    s
}

/// Sidecar holding the height of the first header in a `headers.bin`.
pub fn height_sidecar(headers: &Path) -> PathBuf {
    let mut s = headers.as_os_str().to_owned();
    s.push(".start_height");
    PathBuf::from(s)
}

pub fn parse_headers(bytes: &[u8], start_height: u64) -> Result<Vec<BlockHeader>, FormatError> {
    if bytes.is_empty() || !bytes.len().is_multiple_of(HEADER_LEN) {
        return Err(FormatError::Invalid(format!(
            "headers file is {} bytes, not a positive multiple of {HEADER_LEN}",
            bytes.len()
        )));
    }
    bytes
        .chunks(HEADER_LEN)
        .enumerate()
        .map(|(i, c)| {
            parse_header(c, start_height + i as u64).map_err(|e| FormatError::Invalid(e.to_string()))
        })
        .collect()
}

pub fn parse_start_height(text: &str) -> Result<u64, FormatError> {
    let mut it = lines(text);
    let (n, l) = it.next().ok_or_else(|| FormatError::Invalid("empty start_height file".into()))?;
    let l = l.strip_prefix("start_height").map(|r| r.trim_start_matches([' ', '='])).unwrap_or(l);
    field("start_height", n, "start_height", Some(l))
}

pub fn encode_headers(headers: &[BlockHeader]) -> Vec<u8> {
    headers.iter().flat_map(|h| h.raw).collect()
}

fn hex32(what: &str, text: &str) -> Result<[u8; 32], FormatError> {
    let t = text.trim();
    let mut out = [0u8; 32];
    hex::decode_to_slice(t, &mut out)
        .map_err(|_| FormatError::Invalid(format!("{what}: expected 64 hex characters")))?;
    Ok(out)
}

pub fn parse_secret_key(text: &str) -> Result<RelayKeypair, FormatError> {
    RelayKeypair::from_secret_bytes(&hex32("secret key", text)?)
        .map_err(|e| FormatError::Invalid(e.to_string()))
}

pub fn parse_node_id(text: &str) -> Result<NodeId, FormatError> {
    Ok(NodeId(hex32("public key", text)?))
}
