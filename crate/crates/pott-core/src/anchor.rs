//! Bitcoin header time anchoring: MedianTimePast, the arrived-before-expiry
//! decision, historical MTP drift and dispute bundles.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::cbor::Encoder;
use crate::receipt::ReceiptChain;
use crate::timebase::{
    seconds_to_fine, tai_to_unix_utc, LeapSecondTable, TaiTimestamp, TimeError,
};

/// Headers in the MedianTimePast window.
pub const MTP_SPAN: usize = 11;
pub const HEADER_LEN: usize = 80;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnchorError {
    WrongLength(usize),
    EmptyInput,
    WindowTooShort(usize),
    InvalidParams(&'static str),
    Time(TimeError),
}

impl fmt::Display for AnchorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnchorError::WrongLength(n) => write!(f, "header must be 80 bytes, got {n}"),
            AnchorError::EmptyInput => f.write_str("no headers supplied"),
            AnchorError::WindowTooShort(n) => {
                write!(f, "drift window needs at least {MTP_SPAN} headers, got {n}")
            }
            AnchorError::InvalidParams(why) => write!(f, "invalid MTP parameters: {why}"),
            AnchorError::Time(e) => write!(f, "{e}"),
        }
    }
}

impl From<TimeError> for AnchorError {
    fn from(e: TimeError) -> Self {
        AnchorError::Time(e)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockHeader {
    pub raw: [u8; HEADER_LEN],
    pub height: u64,
    /// Header nTime, Unix seconds.
    pub timestamp: u32,
}

pub fn parse_header(raw80: &[u8], height: u64) -> Result<BlockHeader, AnchorError> {
    let raw: [u8; HEADER_LEN] =
        raw80.try_into().map_err(|_| AnchorError::WrongLength(raw80.len()))?;
    let timestamp = u32::from_le_bytes([raw[68], raw[69], raw[70], raw[71]]);
    Ok(BlockHeader { raw, height, timestamp })
}

/// Median of the timestamps of the last `min(11, len)` headers.
///
/// With fewer than 11 headers the element at index `len / 2` of the sorted
/// list is taken (lower middle for even counts).
pub fn median_time_past(headers: &[BlockHeader]) -> Result<i64, AnchorError> {
    let tail = &headers[headers.len().saturating_sub(MTP_SPAN)..];
    if tail.is_empty() {
        return Err(AnchorError::EmptyInput);
    }
    let mut ts: Vec<u32> = tail.iter().map(|h| h.timestamp).collect();
    ts.sort_unstable();
    Ok(ts[ts.len() / 2] as i64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MtpParams {
    /// δ: allowance for clock error and policy dwell.
    pub delta_seconds: f64,
    /// Δ_MTP: allowance for MTP lagging wall time.
    pub delta_mtp_seconds: f64,
    /// κ: confirmation safety margin.
    pub kappa_blocks: u64,
    pub h_expiry: u64,
    pub mtp_window_blocks: u64,
}

pub const DEFAULT_DELTA_MTP_SECONDS: f64 = 3600.0;
pub const DEFAULT_MTP_WINDOW_BLOCKS: u64 = 4032;

impl MtpParams {
    /// Checks `delta >= j + 2 sigma` and `0 <= delta_mtp <= 3600`.
    pub fn new(
        delta_seconds: f64,
        delta_mtp_seconds: f64,
        kappa_blocks: u64,
        h_expiry: u64,
        j_seconds: f64,
        sigma_t_seconds: f64,
    ) -> Result<Self, AnchorError> {
        let finite = |x: f64| x.is_finite() && x >= 0.0;
        if !(finite(delta_seconds) && finite(j_seconds) && finite(sigma_t_seconds)) {
            return Err(AnchorError::InvalidParams("times must be finite and non-negative"));
        }
        if delta_seconds < j_seconds + 2.0 * sigma_t_seconds {
            return Err(AnchorError::InvalidParams("delta below J + 2 sigma_t"));
        }
        if !finite(delta_mtp_seconds) || delta_mtp_seconds > DEFAULT_DELTA_MTP_SECONDS {
            return Err(AnchorError::InvalidParams("delta_mtp must lie in [0, 3600] s"));
        }
        Ok(MtpParams {
            delta_seconds,
            delta_mtp_seconds,
            kappa_blocks,
            h_expiry,
            mtp_window_blocks: DEFAULT_MTP_WINDOW_BLOCKS,
        })
    }

    /// δ = J + 2σ_t, Δ_MTP = 3600 s, κ = 0.
    pub fn with_defaults(h_expiry: u64, j_seconds: f64, sigma_t_seconds: f64) -> Result<Self, AnchorError> {
        Self::new(
            j_seconds + 2.0 * sigma_t_seconds,
            DEFAULT_DELTA_MTP_SECONDS,
            0,
            h_expiry,
            j_seconds,
            sigma_t_seconds,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectReason {
    Time,
    Height,
    TimeAndHeight,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpiryDecision {
    pub accept: bool,
    pub reject: Option<RejectReason>,
    pub t_star_utc: i64,
    pub tip_height: u64,
    pub tip_mtp: i64,
    pub rationale: String,
}

/// Accepts iff `utc(t*) + δ <= mtp + Δ_MTP` and `tip.height <= h_expiry - κ`.
///
/// The time comparison is exact in 2^-32 s units so a fractional `t*` is not
/// rounded toward acceptance.
pub fn arrived_before_expiry(
    t_star_tai: TaiTimestamp,
    tip: &BlockHeader,
    tip_mtp: i64,
    params: &MtpParams,
    table: &LeapSecondTable,
) -> Result<ExpiryDecision, AnchorError> {
    let t_star_utc = tai_to_unix_utc(TaiTimestamp::from_seconds(t_star_tai.seconds), table)?;
    let lhs = ((t_star_utc as i128) << 32)
        + t_star_tai.frac.unwrap_or(0) as i128
        + seconds_to_fine(params.delta_seconds).ok_or(AnchorError::InvalidParams("delta"))?;
    let rhs = ((tip_mtp as i128) << 32)
        + seconds_to_fine(params.delta_mtp_seconds).ok_or(AnchorError::InvalidParams("delta_mtp"))?;
    let time_ok = lhs <= rhs;
    let height_ok = params
        .h_expiry
        .checked_sub(params.kappa_blocks)
        .is_some_and(|limit| tip.height <= limit);

    let reject = match (time_ok, height_ok) {
        (true, true) => None,
        (false, true) => Some(RejectReason::Time),
        (true, false) => Some(RejectReason::Height),
        (false, false) => Some(RejectReason::TimeAndHeight),
    };
    let time_clause = format!(
        "utc(t*) {} + delta {} {} mtp {} + delta_mtp {}",
        t_star_utc,
        params.delta_seconds,
        if time_ok { "<=" } else { ">" },
        tip_mtp,
        params.delta_mtp_seconds
    );
    let height_clause = format!(
        "tip height {} {} h_expiry {} - kappa {}",
        tip.height,
        if height_ok { "<=" } else { ">" },
        params.h_expiry,
        params.kappa_blocks
    );
    let rationale = match reject {
        None => format!("accept: {time_clause}; {height_clause}"),
        Some(RejectReason::Time) => format!("reject (time): {time_clause}"),
        Some(RejectReason::Height) => format!("reject (height): {height_clause}"),
        Some(RejectReason::TimeAndHeight) => {
            format!("reject (time, height): {time_clause}; {height_clause}")
        }
    };
    Ok(ExpiryDecision {
        accept: reject.is_none(),
        reject,
        t_star_utc,
        tip_height: tip.height,
        tip_mtp,
        rationale,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DriftBound {
    pub drift_seconds: u64,
    pub start_height: u64,
    pub end_height: u64,
}

/// Largest `|MTP(i) - nTime(i)|` over every header with a full 11-header
/// window inside `headers`. The returned range is the whole input.
pub fn mtp_drift_bound(headers: &[BlockHeader]) -> Result<DriftBound, AnchorError> {
    if headers.len() < MTP_SPAN {
        return Err(AnchorError::WindowTooShort(headers.len()));
    }
    let mut drift = 0u64;
    for i in MTP_SPAN - 1..headers.len() {
        let mtp = median_time_past(&headers[i + 1 - MTP_SPAN..=i])?;
        drift = drift.max(mtp.abs_diff(headers[i].timestamp as i64));
    }
    Ok(DriftBound {
        drift_seconds: drift,
        start_height: headers[0].height,
        end_height: headers[headers.len() - 1].height,
    })
}

/// Everything a counterparty needs to re-run an expiry decision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DisputeBundle {
    pub chain: ReceiptChain,
    pub decision: ExpiryDecision,
    pub t_star: TaiTimestamp,
    pub drift: DriftBound,
    pub beacon_ids: Vec<String>,
}

impl DisputeBundle {
    /// Canonical CBOR map with text keys in length-then-bytewise order:
    /// `mtp, chain, t_star, verdict, mtp_drift, beacon_ids, tip_height,
    /// window_range`.
    pub fn encode(&self) -> Vec<u8> {
        let mut e = Encoder::new();
        e.map(8);
        e.text("mtp").int(self.decision.tip_mtp);
        e.text("chain").raw(&self.chain.encode());
        e.text("t_star").array(2).uint(self.t_star.seconds).uint(self.t_star.frac.unwrap_or(0) as u64);
        e.text("verdict").array(2).bool(self.decision.accept).text(&self.decision.rationale);
        e.text("mtp_drift").uint(self.drift.drift_seconds);
        e.text("beacon_ids").array(self.beacon_ids.len());
        for b in &self.beacon_ids {
            e.text(b);
        }
        e.text("tip_height").uint(self.decision.tip_height);
        e.text("window_range").array(2).uint(self.drift.start_height).uint(self.drift.end_height);
        e.into_bytes()
    }
}
