//! The `pott` command line.
//!
//! Exit codes: 0 success or compliant, 1 verification or policy failure,
//! 2 usage error, 3 I/O or format error. Every run writes at least one
//! report line to standard output.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use pott_core::anchor::{
    arrived_before_expiry, median_time_past, mtp_drift_bound, DisputeBundle, MtpParams,
    DEFAULT_DELTA_MTP_SECONDS,
};
use pott_core::assess::{assess_chains, Assessment};
use pott_core::latency::{
    cltv_extra_blocks, cltv_step_table, cltv_total_blocks, csv_sequence_units, link_budget,
    stale_fair_interval, stale_probability, StaleBoundInputs, TimelockInputs,
};
use pott_core::policy::{check_high_stakes, load_manifest, AllowlistManifest, PolicyError, PolicyProfile};
use pott_core::privacy::{commit_transcript, verify_opening, TranscriptCommitment};
use pott_core::sim::run_scenario;
use pott_core::signing::NodeId;
use pott_core::{verify_structure, BeaconReading, LeapSecondTable, OwltEnvelope, ReceiptChain, RelayKeypair, TaiTimestamp};

use crate::corpus::{self, write_corpus};
use crate::formats::{self, FormatError};
use crate::report::{Format, Report};
use crate::scenario::ScenarioFile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "pott", version, about = "Proof-of-transit timestamping tools")]
struct Cli {
    /// Report format.
    #[arg(long, value_enum, global = true, default_value = "json")]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Generate a relay keypair: PREFIX.key (secret hex) and PREFIX.pub.
    Keygen {
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify a chain against an allowlist manifest and policy profile.
    Verify(VerifyArgs),
    /// Decide whether a chain arrived before an HTLC expiry.
    Adjudicate(AdjudicateArgs),
    /// Latency-aware CLTV delta and total.
    Cltv(CltvArgs),
    /// Yearly volume and sustained bit rate of a header or filter feed.
    Budget {
        #[arg(long)]
        blocks_per_year: u64,
        #[arg(long)]
        bytes_per_block: f64,
    },
    /// Block interval keeping the stale rate near epsilon.
    Stale {
        /// Largest one-way light time, minutes.
        #[arg(long)]
        max_owlt: f64,
        /// Extra propagation margin, minutes.
        #[arg(long, default_value_t = 0.0)]
        margin: f64,
        #[arg(long)]
        epsilon: f64,
    },
    /// Run a scenario file and write its fixture corpus.
    Simulate { scenario: PathBuf, out_dir: PathBuf },
    /// Write a transcript commitment for a chain.
    Commit {
        chain: PathBuf,
        /// Defaults to commitment.pottp for entry directories, else the
        /// chain path with a .pottp extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a revealed chain against its commitment.
    Open {
        commitment: PathBuf,
        chain: PathBuf,
        /// Allowlist for the structural check; without it the chain's own
        /// nodes are accepted.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// A .pottc file or a corpus entry directory.
    chain: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// key=value policy profile; defaults apply when omitted.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// OWLT envelope CSV; without it no cross-domain handoff is consistent.
    #[arg(long)]
    envelope: Option<PathBuf>,
    /// Beacon CSV for chain files. Entry directories and chain files with a
    /// beacons.csv beside them use that instead when this is omitted.
    #[arg(long)]
    beacons: Option<PathBuf>,
    /// Require path-diverse chains; takes the other chains for the payload.
    #[arg(long, num_args = 0..)]
    high_stakes: Option<Vec<PathBuf>>,
    /// Current TAI seconds, for manifest staleness.
    #[arg(long)]
    now: Option<u64>,
    /// Hex key the manifest must be signed by.
    #[arg(long)]
    trusted_signer: Option<String>,
}

#[derive(Debug, Args)]
struct AdjudicateArgs {
    chain: PathBuf,
    /// Concatenated raw 80-byte headers.
    #[arg(long)]
    headers: PathBuf,
    /// Height of the first header; read from HEADERS.start_height if omitted.
    #[arg(long)]
    start_height: Option<u64>,
    #[arg(long)]
    h_expiry: u64,
    /// δ in seconds; defaults to J + 2 σ_t.
    #[arg(long)]
    delta: Option<f64>,
    /// Δ_MTP in seconds.
    #[arg(long, default_value_t = DEFAULT_DELTA_MTP_SECONDS)]
    delta_mtp: f64,
    #[arg(long, default_value_t = 0)]
    kappa: u64,
    /// J in minutes.
    #[arg(long, default_value_t = 60.0)]
    jitter: f64,
    /// σ_t in seconds.
    #[arg(long, default_value_t = 60.0)]
    sigma_t: f64,
    /// Allowlist for the structural check; without it the chain's own nodes
    /// are accepted.
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Beacon readings whose ids go into the bundle.
    #[arg(long)]
    beacons: Option<PathBuf>,
    #[arg(long)]
    leap_seconds: Option<PathBuf>,
    /// Where to write the dispute bundle (CBOR).
    #[arg(long)]
    bundle: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CltvArgs {
    /// One-way light time, minutes.
    #[arg(long, required_unless_present = "table")]
    owlt: Option<f64>,
    /// Per-hop timing bound J, minutes.
    #[arg(long, required_unless_present = "table")]
    jitter: Option<f64>,
    #[arg(long, default_value_t = 144)]
    base: u64,
    #[arg(long, default_value_t = 2)]
    mop: u64,
    /// Block target, minutes.
    #[arg(long, default_value_t = 10.0)]
    btarget: f64,
    /// Write the step table for J in {0, 30, 60} over OWLT 0 to 22 minutes
    /// as CSV; `-` for standard output.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Io(e.to_string())
    }
}

type CmdResult = Result<i32, CliError>;

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_OK;
            }
            let _ = write!(err, "{e}");
            let text = args.windows(2).any(|w| w[0] == "--format" && w[1] == "text")
                || args.iter().any(|a| a == "--format=text");
            let fmt = if text { Format::Text } else { Format::Json };
            let rendered = e.to_string();
            let first = rendered.lines().next().unwrap_or_default();
            let msg = first.strip_prefix("error: ").unwrap_or(first).to_owned();
            Report::new(fmt, out).emit("error", json!({ "kind": "usage", "message": msg, "exit": EXIT_USAGE }));
            return EXIT_USAGE;
        }
    };
    let mut rep = Report::new(cli.format, out);
    let res = match cli.cmd {
        Cmd::Keygen { out } => keygen(&mut rep, &out),
        Cmd::Verify(a) => verify(&mut rep, a),
        Cmd::Adjudicate(a) => adjudicate(&mut rep, a),
        Cmd::Cltv(a) => cltv(&mut rep, a),
        Cmd::Budget { blocks_per_year, bytes_per_block } => budget(&mut rep, blocks_per_year, bytes_per_block),
        Cmd::Stale { max_owlt, margin, epsilon } => stale(&mut rep, max_owlt, margin, epsilon),
        Cmd::Simulate { scenario, out_dir } => simulate(&mut rep, &scenario, &out_dir),
        Cmd::Commit { chain, out } => commit(&mut rep, &chain, out),
        Cmd::Open { commitment, chain, manifest } => open(&mut rep, &commitment, &chain, manifest.as_deref()),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            let (kind, code, msg) = match e {
                CliError::Usage(m) => ("usage", EXIT_USAGE, m),
                CliError::Io(m) => ("io", EXIT_IO, m),
            };
            let _ = writeln!(err, "pott: {msg}");
            rep.emit("error", json!({ "kind": kind, "message": msg, "exit": code }));
            code
        }
    }
}

fn keygen(rep: &mut Report, prefix: &Path) -> CmdResult {
    let key = RelayKeypair::generate(&mut rand::rngs::OsRng);
    let secret_path = with_suffix(prefix, ".key");
    let public_path = with_suffix(prefix, ".pub");
    for p in [&secret_path, &public_path] {
        if p.exists() {
            return Err(CliError::Io(format!("{} exists; refusing to overwrite", p.display())));
        }
    }
    let public = key.public().to_string();
    create_new(&secret_path, &format!("{}\n", hex::encode(key.secret_bytes())))?;
    create_new(&public_path, &format!("{public}\n"))?;
    rep.emit(
        "keygen",
        json!({ "public": public, "secret_path": secret_path, "public_path": public_path }),
    );
    Ok(EXIT_OK)
}

fn with_suffix(p: &Path, suffix: &str) -> PathBuf {
    let mut s = p.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn create_new(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let mut f = OpenOptions::new().write(true).create_new(true).open(path).map_err(io)?;
    f.write_all(contents.as_bytes()).map_err(io)
}

/// A chain argument: a `.pottc` file or an entry directory.
fn load_chain(path: &Path, beacons: Option<&Path>) -> Result<(ReceiptChain, Vec<BeaconReading>), CliError> {
    let (chain_path, sibling) = if path.is_dir() {
        (path.join(corpus::CHAIN), path.join(corpus::BEACONS))
    } else {
        let dir = path.parent().unwrap_or(Path::new("."));
        (path.to_owned(), dir.join(corpus::BEACONS))
    };
    let chain = corpus::decode_chain(&chain_path)?;
    let beacons = match beacons {
        Some(b) => formats::parse_beacons(&formats::read_text(b)?)?,
        None if sibling.is_file() => formats::parse_beacons(&formats::read_text(&sibling)?)?,
        None => Vec::new(),
    };
    Ok((chain, beacons))
}

fn manifest_error(e: PolicyError) -> Result<Value, CliError> {
    match e {
        PolicyError::Malformed(_) | PolicyError::Cbor(_) => Err(CliError::Io(e.to_string())),
        _ => Ok(json!({ "ok": false, "error": e.to_string() })),
    }
}

fn read_manifest(
    path: &Path,
    now: Option<u64>,
    trusted: Option<&NodeId>,
) -> Result<Result<AllowlistManifest, Value>, CliError> {
    let bytes = formats::read(path)?;
    match load_manifest(&bytes, now.map(TaiTimestamp::from_seconds), trusted) {
        Ok(m) => Ok(Ok(m)),
        Err(e) => Ok(Err(manifest_error(e)?)),
    }
}

fn verify(rep: &mut Report, a: VerifyArgs) -> CmdResult {
    let trusted = a.trusted_signer.as_deref().map(formats::parse_node_id).transpose().map_err(|e| CliError::Usage(e.to_string()))?;
    let profile = match &a.profile {
        Some(p) => formats::parse_profile(&formats::read_text(p)?)?,
        None => PolicyProfile::default(),
    };
    let envelope = match &a.envelope {
        Some(p) => formats::parse_envelope(&formats::read_text(p)?)?,
        None => OwltEnvelope::default(),
    };
    let mut paths = vec![a.chain.clone()];
    paths.extend(a.high_stakes.iter().flatten().cloned());
    let set = paths
        .iter()
        .map(|p| load_chain(p, a.beacons.as_deref()))
        .collect::<Result<Vec<_>, _>>()?;

    let manifest = match read_manifest(&a.manifest, a.now, trusted.as_ref())? {
        Ok(m) => m,
        Err(v) => {
            rep.emit("manifest", v);
            rep.emit("result", json!({ "compliant": false, "exit": EXIT_FAIL }));
            return Ok(EXIT_FAIL);
        }
    };
    rep.emit(
        "manifest",
        json!({
            "ok": true,
            "version": manifest.version,
            "signer": manifest.signer.to_string(),
            "entries": manifest.entries.len(),
            "revoked": manifest.revoked.len(),
        }),
    );

    let assessed = assess_chains(&set, &manifest, &profile, &envelope).map_err(|e| CliError::Usage(e.to_string()))?;
    for (p, got) in paths.iter().zip(&assessed) {
        report_assessment(rep, p, got.as_ref());
    }
    let primary_ok = assessed[0].as_ref().is_some_and(Assessment::compliant);
    let mut ok = primary_ok;
    if a.high_stakes.is_some() {
        let pairs: Vec<_> = set
            .iter()
            .zip(&assessed)
            .filter_map(|((c, _), got)| {
                let got = got.as_ref()?;
                let mut v = got.verdict.clone();
                v.compliant = got.compliant();
                Some((c.clone(), v))
            })
            .collect();
        let required = profile.high_stakes_min_diverse_chains;
        match check_high_stakes(&pairs, &manifest, &profile) {
            Ok(hs) => {
                rep.emit("high_stakes", json!({ "ok": hs, "chains": paths.len(), "required": required }));
                ok &= hs;
            }
            Err(e) => {
                rep.emit("high_stakes", json!({ "ok": false, "chains": paths.len(), "required": required, "error": e.to_string() }));
                ok = false;
            }
        }
    }
    let code = if ok { EXIT_OK } else { EXIT_FAIL };
    rep.emit("result", json!({ "compliant": ok, "exit": code }));
    Ok(code)
}

fn report_assessment(rep: &mut Report, path: &Path, got: Option<&Assessment>) {
    let chain = path.display().to_string();
    let Some(a) = got else {
        rep.emit("structure", json!({ "chain": chain, "ok": false, "hops": 0, "error": "empty chain" }));
        return;
    };
    let r = &a.report;
    for f in &r.failures {
        rep.emit("finding", json!({ "chain": chain, "id": f.rule.id(), "hop": f.hop, "detail": f.kind.to_string() }));
    }
    rep.emit(
        "structure",
        json!({ "chain": chain, "ok": r.structural_ok, "hops": r.hop_count, "rules_failed": ids(r.rules_failed().iter().map(|x| x.id())) }),
    );
    for v in &a.verdict.violations {
        rep.emit("finding", json!({ "chain": chain, "id": v.check.id(), "detail": v.detail }));
    }
    if a.nonce_reused {
        rep.emit("finding", json!({ "chain": chain, "id": pott_core::assess::NONCE_REUSE, "detail": "nonce reused with a different origin receipt" }));
    }
    rep.emit(
        "policy",
        json!({
            "chain": chain,
            "compliant": a.compliant(),
            "assurance": a.assurance().as_str(),
            "flags": ids(a.flags().into_iter()),
            "anchors": a.verdict.anchors,
        }),
    );
}

fn ids<'a>(it: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    it.collect()
}

fn adjudicate(rep: &mut Report, a: AdjudicateArgs) -> CmdResult {
    let (chain, beacons) = load_chain(&a.chain, a.beacons.as_deref())?;
    let allow: BTreeSet<NodeId> = match &a.manifest {
        Some(p) => match read_manifest(p, None, None)? {
            Ok(m) => m.allowlist(),
            Err(v) => {
                rep.emit("manifest", v);
                return Ok(EXIT_FAIL);
            }
        },
        None => chain.receipts().iter().map(|r| r.node).collect(),
    };
    let j_seconds = a.jitter * 60.0;
    let params = match a.delta {
        Some(d) => MtpParams::new(d, a.delta_mtp, a.kappa, a.h_expiry, j_seconds, a.sigma_t),
        None => MtpParams::new(j_seconds + 2.0 * a.sigma_t, a.delta_mtp, a.kappa, a.h_expiry, j_seconds, a.sigma_t),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    let table = match &a.leap_seconds {
        Some(p) => formats::parse_leap_seconds(&formats::read_text(p)?)?,
        None => LeapSecondTable::builtin(),
    };
    let start_height = match a.start_height {
        Some(h) => h,
        None => formats::parse_start_height(&formats::read_text(&formats::height_sidecar(&a.headers))?)?,
    };
    let headers = formats::parse_headers(&formats::read(&a.headers)?, start_height)?;

    let report = verify_structure(&chain, &allow).map_err(|e| CliError::Io(e.to_string()))?;
    if !report.structural_ok {
        for f in &report.failures {
            rep.emit("finding", json!({ "id": f.rule.id(), "hop": f.hop, "detail": f.kind.to_string() }));
        }
        rep.emit("result", json!({ "accept": false, "exit": EXIT_FAIL, "rationale": "chain is not structurally valid" }));
        return Ok(EXIT_FAIL);
    }

    let window = &headers[headers.len().saturating_sub(params.mtp_window_blocks as usize)..];
    let drift = mtp_drift_bound(window).map_err(|e| CliError::Io(format!("{}: {e}", a.headers.display())))?;
    let tip = headers.last().expect("parse_headers rejects empty input");
    let tip_mtp = median_time_past(&headers).map_err(|e| CliError::Io(e.to_string()))?;
    let t_star = report.t_last_out;
    let decision = arrived_before_expiry(t_star, tip, tip_mtp, &params, &table).map_err(|e| CliError::Io(e.to_string()))?;

    let mut beacon_ids: Vec<String> = beacons.into_iter().map(|b| b.beacon_id).collect();
    beacon_ids.sort();
    beacon_ids.dedup();
    let reject = decision.reject.map(|r| format!("{r:?}").to_lowercase());
    let code = if decision.accept { EXIT_OK } else { EXIT_FAIL };
    let bundle = DisputeBundle { chain, decision, t_star, drift, beacon_ids };
    if let Some(p) = &a.bundle {
        formats::write(p, &bundle.encode())?;
    }
    let d = &bundle.decision;
    rep.emit(
        "adjudicate",
        json!({
            "accept": d.accept,
            "reject": reject,
            "t_star_tai": t_star.seconds,
            "t_star_utc": d.t_star_utc,
            "tip_height": d.tip_height,
            "tip_mtp": d.tip_mtp,
            "delta_seconds": params.delta_seconds,
            "delta_mtp_seconds": params.delta_mtp_seconds,
            "kappa_blocks": params.kappa_blocks,
            "h_expiry": params.h_expiry,
            "mtp_drift_seconds": bundle.drift.drift_seconds,
            "window_range": [bundle.drift.start_height, bundle.drift.end_height],
            "beacon_ids": bundle.beacon_ids,
            "rationale": d.rationale,
            "bundle": a.bundle,
            "text": d.rationale,
        }),
    );
    rep.emit("result", json!({ "accept": d.accept, "exit": code }));
    Ok(code)
}

fn latency_usage(e: pott_core::latency::LatencyError) -> CliError {
    CliError::Usage(e.to_string())
}

fn cltv(rep: &mut Report, a: CltvArgs) -> CmdResult {
    if let Some(dest) = &a.table {
        let rows = cltv_step_table(&[0.0, 30.0, 60.0], 220).map_err(latency_usage)?;
        let mut csv = String::from("owlt_min,J,delta_blocks\n");
        for r in &rows {
            csv.push_str(&format!("{:.1},{},{}\n", r.owlt_minutes, r.j_minutes, r.delta_blocks));
        }
        if dest.as_os_str() == "-" {
            rep.raw(&csv);
        } else {
            formats::write(dest, csv.as_bytes())?;
            rep.emit("table", json!({ "rows": rows.len(), "path": dest }));
        }
        if a.owlt.is_none() {
            return Ok(EXIT_OK);
        }
    }
    let (Some(owlt), Some(j)) = (a.owlt, a.jitter) else {
        return Err(CliError::Usage("--owlt and --jitter are required".into()));
    };
    let inp = TimelockInputs {
        owlt_minutes: owlt,
        j_minutes: j,
        b_target_minutes: a.btarget,
        b_base_blocks: a.base,
        m_op_blocks: a.mop,
    };
    let delta = cltv_extra_blocks(&inp).map_err(latency_usage)?;
    let total = cltv_total_blocks(&inp).map_err(latency_usage)?;
    let csv_units = csv_sequence_units((2.0 * owlt + j) * 60.0).map_err(latency_usage)?;
    rep.emit(
        "cltv",
        json!({
            "owlt_minutes": owlt,
            "j_minutes": j,
            "b_target_minutes": a.btarget,
            "base_blocks": a.base,
            "m_op_blocks": a.mop,
            "delta": delta,
            "total": total,
            "csv_units": csv_units,
            "text": format!("delta={delta} total={total}"),
        }),
    );
    Ok(EXIT_OK)
}

/// Three significant figures, trailing zeros dropped.
pub fn sig3(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return "0".into();
    }
    let digits = v.abs().log10().floor() as i32 + 1;
    let decimals = (3 - digits).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

/// Decimal byte units: `4.2 MB`.
pub fn human_bytes(b: f64) -> String {
    const UNITS: [&str; 5] = ["B", "kB", "MB", "GB", "TB"];
    let mut v = b;
    let mut u = 0;
    while v >= 1000.0 && u + 1 < UNITS.len() {
        v /= 1000.0;
        u += 1;
    }
    format!("{} {}", sig3(v), UNITS[u])
}

fn budget(rep: &mut Report, blocks: u64, bytes: f64) -> CmdResult {
    let b = link_budget(blocks, bytes).map_err(latency_usage)?;
    rep.emit(
        "budget",
        json!({
            "blocks_per_year": blocks,
            "bytes_per_block": bytes,
            "bytes_per_year": b.bytes_per_year,
            "sustained_bps": b.sustained_bps,
            "text": format!("{}/yr, {} bps", human_bytes(b.bytes_per_year), sig3(b.sustained_bps)),
        }),
    );
    Ok(EXIT_OK)
}

fn stale(rep: &mut Report, max_owlt: f64, margin: f64, epsilon: f64) -> CmdResult {
    let inp = StaleBoundInputs { max_owlt_minutes: max_owlt, margin_minutes: margin, epsilon };
    let d = inp.propagation_delay_minutes().map_err(latency_usage)?;
    let b = stale_fair_interval(&inp).map_err(latency_usage)?;
    let p = stale_probability(d, b).map_err(latency_usage)?;
    rep.emit(
        "stale",
        json!({
            "propagation_delay_minutes": d,
            "block_interval_minutes": b,
            "stale_probability": p,
            "text": format!("b={b} min ({} h), stale probability {p:.4}", sig3(b / 60.0)),
        }),
    );
    Ok(EXIT_OK)
}

fn simulate(rep: &mut Report, scenario: &Path, out_dir: &Path) -> CmdResult {
    let text = formats::read_text(scenario)?;
    let file = ScenarioFile::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", scenario.display())))?;
    let out = run_scenario(&file.scenario).map_err(|e| CliError::Usage(e.to_string()))?;
    write_corpus(out_dir, &file, &out)?;
    for e in &out.entries {
        let l = &e.label;
        rep.emit(
            "entry",
            json!({
                "name": e.name,
                "delivered": l.delivered,
                "compliant": l.compliant,
                "assurance": l.assurance.map(|a| a.as_str()),
                "flags": l.flags,
                "hops": e.chain.as_ref().map(|c| c.len()),
            }),
        );
    }
    rep.emit("simulate", json!({ "scenario": file.scenario.name, "entries": out.entries.len(), "out_dir": out_dir }));
    Ok(EXIT_OK)
}

fn commitment_json(cm: &TranscriptCommitment) -> Value {
    json!({
        "h_txpt": hex::encode(cm.h_txpt),
        "t_min_in": cm.t_min_in.seconds,
        "t_max_out": cm.t_max_out.seconds,
        "hop_count": cm.hop_count,
    })
}

fn commit(rep: &mut Report, chain_path: &Path, out: Option<PathBuf>) -> CmdResult {
    let (chain, _) = load_chain(chain_path, None)?;
    let cm = commit_transcript(&chain).map_err(|e| CliError::Io(e.to_string()))?;
    let out = out.unwrap_or_else(|| {
        if chain_path.is_dir() {
            chain_path.join(corpus::COMMITMENT)
        } else {
            chain_path.with_extension("pottp")
        }
    });
    formats::write(&out, &cm.encode())?;
    let mut v = commitment_json(&cm);
    v["path"] = json!(out);
    rep.emit("commit", v);
    Ok(EXIT_OK)
}

fn open(rep: &mut Report, commitment: &Path, chain_path: &Path, manifest: Option<&Path>) -> CmdResult {
    let cm = TranscriptCommitment::decode(&formats::read(commitment)?)
        .map_err(|e| CliError::Io(format!("{}: {e}", commitment.display())))?;
    let (chain, _) = load_chain(chain_path, None)?;
    let allow: BTreeSet<NodeId> = match manifest {
        Some(p) => match read_manifest(p, None, None)? {
            Ok(m) => m.allowlist(),
            Err(v) => {
                rep.emit("manifest", v);
                return Ok(EXIT_FAIL);
            }
        },
        None => chain.receipts().iter().map(|r| r.node).collect(),
    };
    let o = verify_opening(&cm, &chain, &allow);
    for v in &o.violations {
        rep.emit("finding", json!({ "detail": v.to_string() }));
    }
    let code = if o.ok { EXIT_OK } else { EXIT_FAIL };
    let mut v = commitment_json(&cm);
    v["ok"] = json!(o.ok);
    v["exit"] = json!(code);
    rep.emit("open", v);
    Ok(code)
}
