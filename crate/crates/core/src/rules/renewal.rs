//! Renewal-policy classification from the waiting-gap probe.
//!
//! The probe requests codes at three waiting gaps, once consuming each
//! code and once leaving them unconsumed, and the classifier decides
//! when the server replaces the current code: on every request, on
//! consumption, or after a fixed age.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Waiting gaps (seconds) probed per arm: 2, 20, and 60 minutes.
pub const PROBE_GAPS: [u64; 3] = [120, 1200, 3600];

/// Requests issued per probe arm.
pub const PROBE_REQUESTS_PER_ARM: usize = 6;

/// One probe arm: codes requested `gap_seconds` apart, either consuming
/// each code after reading it or leaving them all unconsumed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeCell {
    pub gap_seconds: u64,
    pub consume: bool,
    pub codes: Vec<String>,
    /// False when the arm was cut short (quota, extraction failures).
    pub complete: bool,
}

/// Output of a renewal probe: one cell per (gap, arm) combination.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenewalProbeResult {
    pub cells: Vec<ProbeCell>,
}

/// The classified renewal policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum RenewalClass {
    /// Every request issues a fresh code.
    PerRequest,
    /// The code is replaced only after it is consumed.
    OnConsume,
    /// The code is replaced once it is `seconds` old.
    AfterDuration { seconds: u64 },
}

impl fmt::Display for RenewalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RenewalClass::PerRequest => f.write_str("per_request"),
            RenewalClass::OnConsume => f.write_str("on_consume"),
            RenewalClass::AfterDuration { seconds } => {
                write!(f, "after_duration({seconds} s)")
            }
        }
    }
}

/// Probe data that fits none of the known policies, with the raw cells
/// the decision was based on.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("renewal policy unclassifiable: {reason}")]
pub struct UnclassifiableError {
    pub reason: String,
    pub cells: Vec<ProbeCell>,
}

fn unclassifiable(reason: impl Into<String>, probe: &RenewalProbeResult) -> UnclassifiableError {
    UnclassifiableError {
        reason: reason.into(),
        cells: probe.cells.clone(),
    }
}

fn every_pair_differs(codes: &[String]) -> bool {
    codes.windows(2).all(|w| w[0] != w[1])
}

fn any_pair_differs(codes: &[String]) -> bool {
    codes.windows(2).any(|w| w[0] != w[1])
}

/// Classifies the renewal policy from probe observations.
///
/// Decision procedure over the no-consume arms first: if renewal keeps
/// pace with the requests (every successive pair differs) at every gap,
/// the policy is per-request; if it keeps pace from some gap upward, the
/// code expires by age and the smallest such gap bounds the duration
/// (a shorter true duration would already keep pace at a smaller gap).
/// If codes never change while waiting, the consume arms decide: fresh
/// codes after every consumption mean consumption-driven renewal.
///
/// Renewal faster than the smallest probed gap is indistinguishable from
/// per-request issuance and is classified as per-request.
pub fn classify_renewal_policy(
    probe: &RenewalProbeResult,
) -> Result<RenewalClass, UnclassifiableError> {
    let cell = |gap: u64, consume: bool| -> Result<&ProbeCell, UnclassifiableError> {
        let found = probe
            .cells
            .iter()
            .find(|c| c.gap_seconds == gap && c.consume == consume)
            .ok_or_else(|| {
                unclassifiable(format!("missing probe arm: gap {gap} s, consume {consume}"), probe)
            })?;
        if !found.complete || found.codes.len() < 2 {
            return Err(unclassifiable(
                format!("incomplete probe arm: gap {gap} s, consume {consume}"),
                probe,
            ));
        }
        Ok(found)
    };

    let mut keeps_pace = Vec::with_capacity(PROBE_GAPS.len());
    let mut changed_at_all = Vec::with_capacity(PROBE_GAPS.len());
    for &gap in &PROBE_GAPS {
        let c = cell(gap, false)?;
        keeps_pace.push(every_pair_differs(&c.codes));
        changed_at_all.push(any_pair_differs(&c.codes));
    }

    if keeps_pace.iter().all(|&b| b) {
        return Ok(RenewalClass::PerRequest);
    }
    if let Some(i) = keeps_pace.iter().position(|&b| b) {
        if keeps_pace[i..].iter().all(|&b| b) {
            return Ok(RenewalClass::AfterDuration {
                seconds: PROBE_GAPS[i],
            });
        }
        return Err(unclassifiable(
            "renewal keeps pace at a smaller gap but not at a larger one",
            probe,
        ));
    }
    if changed_at_all.iter().any(|&b| b) {
        return Err(unclassifiable(
            "codes changed while waiting but renewal keeps pace at no probed gap; \
             the renewal duration lies outside the probed range",
            probe,
        ));
    }

    // Codes never change from waiting alone; consumption decides.
    let mut consume_renews = Vec::with_capacity(PROBE_GAPS.len());
    for &gap in &PROBE_GAPS {
        let c = cell(gap, true)?;
        consume_renews.push(every_pair_differs(&c.codes));
    }
    if consume_renews.iter().all(|&b| b) {
        return Ok(RenewalClass::OnConsume);
    }
    if consume_renews.iter().any(|&b| b) {
        return Err(unclassifiable(
            "consumption renews the code at some gaps but not at others",
            probe,
        ));
    }
    Err(unclassifiable(
        "codes never changed, with or without consumption",
        probe,
    ))
}
