//! TAI timestamps (CUC epoch 1958-01-01), TAI to UTC conversion, OWLT
//! envelopes and time-beacon readings.

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// 1958-01-01 to 1970-01-01: 4383 days.
pub const SECONDS_1958_TO_1970: u64 = 378_691_200;

const FRAC_ONE: i128 = 1 << 32;

/// TAI seconds since 1958-01-01T00:00:00 TAI, with an optional CUC fine
/// field in units of 2^-32 s.
///
/// Equality is structural (`frac: None` differs from `Some(0)`); time
/// comparisons go through [`TaiTimestamp::time_cmp`], which treats a missing
/// fraction as zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct TaiTimestamp {
    pub seconds: u64,
    pub frac: Option<u32>,
}

impl TaiTimestamp {
    pub const fn from_seconds(seconds: u64) -> Self {
        TaiTimestamp { seconds, frac: None }
    }

    pub const fn with_frac(seconds: u64, frac: u32) -> Self {
        TaiTimestamp { seconds, frac: Some(frac) }
    }

    /// Time in 2^-32 s units.
    pub fn fine(&self) -> i128 {
        ((self.seconds as i128) << 32) | self.frac.unwrap_or(0) as i128
    }

    pub fn time_cmp(&self, other: &Self) -> Ordering {
        self.fine().cmp(&other.fine())
    }

    pub fn is_after(&self, other: &Self) -> bool {
        self.time_cmp(other) == Ordering::Greater
    }

    /// `self - earlier` in 2^-32 s units.
    pub fn fine_since(&self, earlier: &Self) -> i128 {
        self.fine() - earlier.fine()
    }

    pub fn offset_seconds(&self, delta: i64) -> Option<Self> {
        let seconds = self.seconds.checked_add_signed(delta)?;
        Some(TaiTimestamp { seconds, frac: self.frac })
    }
}

/// Converts a non-negative number of seconds to 2^-32 s units.
pub(crate) fn seconds_to_fine(s: f64) -> Option<i128> {
    if !s.is_finite() || s < 0.0 {
        return None;
    }
    Some(libm::round(s * FRAC_ONE as f64) as i128)
}

pub(crate) fn whole_seconds_to_fine(s: u64) -> i128 {
    (s as i128) << 32
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PlanetaryDomain {
    Earth,
    Mars,
}

impl PlanetaryDomain {
    pub fn as_str(&self) -> &'static str {
        match self {
            PlanetaryDomain::Earth => "earth",
            PlanetaryDomain::Mars => "mars",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "earth" => Some(PlanetaryDomain::Earth),
            "mars" => Some(PlanetaryDomain::Mars),
            _ => None,
        }
    }

    pub(crate) fn code(&self) -> u64 {
        match self {
            PlanetaryDomain::Earth => 0,
            PlanetaryDomain::Mars => 1,
        }
    }

    pub(crate) fn from_code(c: u64) -> Option<Self> {
        match c {
            0 => Some(PlanetaryDomain::Earth),
            1 => Some(PlanetaryDomain::Mars),
            _ => None,
        }
    }
}

impl fmt::Display for PlanetaryDomain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TimeError {
    /// No table entry applies to the requested instant.
    TableGap,
    InvalidTable(&'static str),
    WindowNotCovered { t_send: u64 },
    InvalidEnvelope(&'static str),
    InvalidSlack,
}

impl fmt::Display for TimeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeError::TableGap => f.write_str("leap-second table does not cover the instant"),
            TimeError::InvalidTable(why) => write!(f, "invalid leap-second table: {why}"),
            TimeError::WindowNotCovered { t_send } => {
                write!(f, "no OWLT window covers TAI {t_send}")
            }
            TimeError::InvalidEnvelope(why) => write!(f, "invalid OWLT envelope: {why}"),
            TimeError::InvalidSlack => f.write_str("slack must be a finite non-negative number"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LeapEntry {
    /// UTC instant (Unix seconds) from which the offset applies.
    pub effective_unix: i64,
    pub tai_minus_utc: i64,
}

/// TAI - UTC offsets indexed by effective UTC instant.
///
/// Instants before the first entry are not covered. After the last entry
/// the last offset keeps applying.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeapSecondTable {
    entries: Vec<LeapEntry>,
}

const BUILTIN_LEAPS: [(i64, i64); 28] = [
    (63072000, 10),
    (78796800, 11),
    (94694400, 12),
    (126230400, 13),
    (157766400, 14),
    (189302400, 15),
    (220924800, 16),
    (252460800, 17),
    (283996800, 18),
    (315532800, 19),
    (362793600, 20),
    (394329600, 21),
    (425865600, 22),
    (489024000, 23),
    (567993600, 24),
    (631152000, 25),
    (662688000, 26),
    (709948800, 27),
    (741484800, 28),
    (773020800, 29),
    (820454400, 30),
    (867715200, 31),
    (915148800, 32),
    (1136073600, 33),
    (1230768000, 34),
    (1341100800, 35),
    (1435708800, 36),
    (1483228800, 37),
];

impl LeapSecondTable {
    pub fn new(entries: Vec<LeapEntry>) -> Result<Self, TimeError> {
        for e in &entries {
            if e.tai_minus_utc < 0 {
                return Err(TimeError::InvalidTable("negative offset"));
            }
        }
        for w in entries.windows(2) {
            if w[1].effective_unix <= w[0].effective_unix {
                return Err(TimeError::InvalidTable("effective instants not strictly increasing"));
            }
            if w[1].tai_minus_utc <= w[0].tai_minus_utc {
                return Err(TimeError::InvalidTable("offsets not strictly increasing"));
            }
        }
        Ok(LeapSecondTable { entries })
    }

    /// Snapshot of the IERS table through the 2017-01-01 leap second
    /// (TAI - UTC = 37 s).
    pub fn builtin() -> Self {
        LeapSecondTable {
            entries: BUILTIN_LEAPS
                .iter()
                .map(|&(effective_unix, tai_minus_utc)| LeapEntry { effective_unix, tai_minus_utc })
                .collect(),
        }
    }

    pub fn entries(&self) -> &[LeapEntry] {
        &self.entries
    }

    /// Offset in force at TAI instant `tai_since_1970` (TAI seconds counted
    /// from 1970-01-01 on the TAI scale).
    fn offset_for_tai(&self, tai_since_1970: i128) -> Result<i64, TimeError> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.effective_unix as i128 + e.tai_minus_utc as i128 <= tai_since_1970)
            .map(|e| e.tai_minus_utc)
            .ok_or(TimeError::TableGap)
    }

    fn offset_for_unix(&self, unix: i64) -> Result<i64, TimeError> {
        self.entries
            .iter()
            .rev()
            .find(|e| e.effective_unix <= unix)
            .map(|e| e.tai_minus_utc)
            .ok_or(TimeError::TableGap)
    }
}

/// TAI-since-1958 to Unix UTC seconds. The fractional part is dropped.
pub fn tai_to_unix_utc(t: TaiTimestamp, table: &LeapSecondTable) -> Result<i64, TimeError> {
    let since_1970 = t.seconds as i128 - SECONDS_1958_TO_1970 as i128;
    let offset = table.offset_for_tai(since_1970)?;
    i64::try_from(since_1970 - offset as i128).map_err(|_| TimeError::TableGap)
}

/// Inverse of [`tai_to_unix_utc`] away from leap-second insertions.
pub fn unix_utc_to_tai(unix: i64, table: &LeapSecondTable) -> Result<TaiTimestamp, TimeError> {
    let offset = table.offset_for_unix(unix)?;
    let tai = unix as i128 + offset as i128 + SECONDS_1958_TO_1970 as i128;
    u64::try_from(tai).map(TaiTimestamp::from_seconds).map_err(|_| TimeError::TableGap)
}

/// One-way light time bounds valid over `[start_tai, end_tai]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OwltWindow {
    pub start_tai: u64,
    pub end_tai: u64,
    pub min_owlt: u64,
    pub max_owlt: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OwltEnvelope {
    windows: Vec<OwltWindow>,
}

impl OwltEnvelope {
    pub fn new(windows: Vec<OwltWindow>) -> Result<Self, TimeError> {
        for w in &windows {
            if w.start_tai > w.end_tai {
                return Err(TimeError::InvalidEnvelope("window ends before it starts"));
            }
            if w.min_owlt > w.max_owlt {
                return Err(TimeError::InvalidEnvelope("min_owlt exceeds max_owlt"));
            }
        }
        Ok(OwltEnvelope { windows })
    }

    pub fn windows(&self) -> &[OwltWindow] {
        &self.windows
    }

    /// First window containing `t` (bounds inclusive).
    pub fn window_at(&self, t: u64) -> Option<&OwltWindow> {
        self.windows.iter().find(|w| w.start_tai <= t && t <= w.end_tai)
    }
}

/// True iff `min - slack <= t_recv - t_send <= max + slack` for the window
/// covering `t_send`. All bounds inclusive.
pub fn within_owlt_envelope(
    t_send: TaiTimestamp,
    t_recv: TaiTimestamp,
    env: &OwltEnvelope,
    slack_seconds: f64,
) -> Result<bool, TimeError> {
    let w = env
        .window_at(t_send.seconds)
        .ok_or(TimeError::WindowNotCovered { t_send: t_send.seconds })?;
    let slack = seconds_to_fine(slack_seconds).ok_or(TimeError::InvalidSlack)?;
    let transit = t_recv.fine_since(&t_send);
    let lo = whole_seconds_to_fine(w.min_owlt) - slack;
    let hi = whole_seconds_to_fine(w.max_owlt) + slack;
    Ok(lo <= transit && transit <= hi)
}

/// A reading from a time beacon on one planetary domain.
#[derive(Debug, Clone, PartialEq)]
pub struct BeaconReading {
    pub beacon_id: String,
    pub domain: PlanetaryDomain,
    pub tai: TaiTimestamp,
    pub sigma_t_seconds: f64,
}
