//! Latency-aware timelocks, header/filter link budgets and the stale-rate
//! block interval bound.
//!
//! Minute-denominated inputs are converted to whole milliseconds before any
//! block arithmetic, so step boundaries such as `RTT + J = k * b_target` land
//! exactly on `k`.

use alloc::vec::Vec;
use core::fmt;

const MS_PER_MINUTE: f64 = 60_000.0;
pub const CSV_UNIT_SECONDS: u64 = 512;
pub const SECONDS_PER_YEAR: f64 = 31_536_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatencyError {
    Negative(&'static str),
    NonPositive(&'static str),
    EpsilonOutOfRange,
}

impl fmt::Display for LatencyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatencyError::Negative(what) => write!(f, "{what} must be finite and non-negative"),
            LatencyError::NonPositive(what) => write!(f, "{what} must be positive"),
            LatencyError::EpsilonOutOfRange => f.write_str("epsilon must lie in (0, 1]"),
        }
    }
}

fn minutes_to_ms(m: f64, what: &'static str) -> Result<u64, LatencyError> {
    if !(m.is_finite() && m >= 0.0) {
        return Err(LatencyError::Negative(what));
    }
    Ok(libm::round(m * MS_PER_MINUTE) as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelockInputs {
    pub owlt_minutes: f64,
    pub j_minutes: f64,
    pub b_target_minutes: f64,
    pub b_base_blocks: u64,
    pub m_op_blocks: u64,
}

impl TimelockInputs {
    /// `b_target = 10`, `B_base = 144`, `M_op = 2`.
    pub fn new(owlt_minutes: f64, j_minutes: f64) -> Self {
        TimelockInputs {
            owlt_minutes,
            j_minutes,
            b_target_minutes: 10.0,
            b_base_blocks: 144,
            m_op_blocks: 2,
        }
    }
}

/// `ceil((2 * owlt + J) / b_target)` blocks.
pub fn cltv_extra_blocks(inp: &TimelockInputs) -> Result<u64, LatencyError> {
    let owlt = minutes_to_ms(inp.owlt_minutes, "owlt")?;
    let j = minutes_to_ms(inp.j_minutes, "J")?;
    let b = minutes_to_ms(inp.b_target_minutes, "b_target")?;
    if b == 0 {
        return Err(LatencyError::NonPositive("b_target"));
    }
    Ok((2 * owlt + j).div_ceil(b))
}

/// `B_base + extra + M_op`.
pub fn cltv_total_blocks(inp: &TimelockInputs) -> Result<u64, LatencyError> {
    Ok(inp.b_base_blocks + cltv_extra_blocks(inp)? + inp.m_op_blocks)
}

/// BIP-68 time-based relative lock units covering `t_seconds`.
pub fn csv_sequence_units(t_seconds: f64) -> Result<u64, LatencyError> {
    if !(t_seconds.is_finite() && t_seconds >= 0.0) {
        return Err(LatencyError::Negative("t"));
    }
    let ms = libm::round(t_seconds * 1000.0) as u64;
    Ok(ms.div_ceil(CSV_UNIT_SECONDS * 1000))
}

/// One row of the timelock step table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRow {
    pub owlt_minutes: f64,
    pub j_minutes: f64,
    pub delta_blocks: u64,
}

/// Extra CLTV blocks for each `J` over OWLT `0, 0.1, ..., max_tenths / 10`
/// minutes, with the default 10-minute block target.
pub fn cltv_step_table(j_values: &[f64], max_tenths: u32) -> Result<Vec<StepRow>, LatencyError> {
    let mut rows = Vec::new();
    for &j in j_values {
        for tenth in 0..=max_tenths {
            let owlt = tenth as f64 / 10.0;
            let delta_blocks = cltv_extra_blocks(&TimelockInputs::new(owlt, j))?;
            rows.push(StepRow { owlt_minutes: owlt, j_minutes: j, delta_blocks });
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub bytes_per_year: f64,
    pub sustained_bps: f64,
}

/// Yearly volume and sustained bit rate over a 365-day year.
pub fn link_budget(blocks_per_year: u64, bytes_per_block: f64) -> Result<LinkBudget, LatencyError> {
    if !(bytes_per_block.is_finite() && bytes_per_block >= 0.0) {
        return Err(LatencyError::Negative("bytes_per_block"));
    }
    let bytes_per_year = blocks_per_year as f64 * bytes_per_block;
    Ok(LinkBudget { bytes_per_year, sustained_bps: bytes_per_year * 8.0 / SECONDS_PER_YEAR })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaleBoundInputs {
    pub max_owlt_minutes: f64,
    pub margin_minutes: f64,
    pub epsilon: f64,
}

impl StaleBoundInputs {
    /// `D = 2 * max_owlt + M`, minutes.
    pub fn propagation_delay_minutes(&self) -> Result<f64, LatencyError> {
        let finite = |x: f64| x.is_finite() && x >= 0.0;
        if !finite(self.max_owlt_minutes) {
            return Err(LatencyError::Negative("max_owlt"));
        }
        if !finite(self.margin_minutes) {
            return Err(LatencyError::Negative("margin"));
        }
        Ok(2.0 * self.max_owlt_minutes + self.margin_minutes)
    }
}

/// Block interval `b = D / epsilon` at which the stale rate is about `epsilon`.
/// `epsilon = 1` is accepted and returns `D`.
pub fn stale_fair_interval(inp: &StaleBoundInputs) -> Result<f64, LatencyError> {
    let d = inp.propagation_delay_minutes()?;
    if !(inp.epsilon > 0.0 && inp.epsilon <= 1.0) {
        return Err(LatencyError::EpsilonOutOfRange);
    }
    Ok(d / inp.epsilon)
}

/// Probability that a block found with mean interval `b` is orphaned by a
/// competing block within delay `d`: `1 - exp(-d / b)`.
pub fn stale_probability(d_minutes: f64, b_minutes: f64) -> Result<f64, LatencyError> {
    if !(d_minutes.is_finite() && d_minutes >= 0.0) {
        return Err(LatencyError::Negative("D"));
    }
    if !(b_minutes.is_finite() && b_minutes > 0.0) {
        return Err(LatencyError::NonPositive("b"));
    }
    Ok(-libm::expm1(-d_minutes / b_minutes))
}
