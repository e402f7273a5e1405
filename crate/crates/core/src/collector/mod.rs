//! OTP collection client.
//!
//! Drives a target server — in-process via [`DirectTarget`] or over HTTP
//! via [`HttpTarget`] — to assemble [`OtpSequence`]s: requests are paced
//! on the target's simulated clock, capped by a request budget, retried
//! on transport failures, and parsed out of SMS bodies with
//! [`parse_sms`]. [`run_renewal_probe`] adds the gap/consume matrix that
//! feeds [`crate::rules::classify_renewal_policy`].


use std::sync::Arc;

use serde_json::{json, Value};
use thiserror::Error;

use crate::harness::http::{http_get, http_post};
use crate::harness::{Harness, HarnessError};
use crate::rules::{
    OtpRecord, OtpSequence, ProbeCell, RenewalProbeResult, RuleError, PROBE_GAPS,
    PROBE_REQUESTS_PER_ARM,
};

/// Most requests a single collect call may issue unless the plan lifts it.
pub const DEFAULT_BUDGET_CAP: usize = 1000;

/// Seconds between two requests unless the plan overrides it.
pub const DEFAULT_INTERVAL_SECONDS: u64 = 60;

/// Attempts per request before a transport failure becomes fatal.
const TRANSPORT_ATTEMPTS: usize = 3;

/// Phone number used when the collector registers accounts itself.
const COLLECTOR_PHONE: &str = "+15550100";

/// Errors a target can signal back to the collector.
#[derive(Debug, Error)]
pub enum TargetError {
    /// The per-account daily quota is exhausted.
    #[error("quota exhausted")]
    Quota,
    #[error("unknown account {0:?}")]
    UnknownAccount(String),
    #[error("account {0:?} already exists")]
    AccountExists(String),
    /// Could not reach the target (retried).
    #[error("transport: {0}")]
    Transport(String),
    /// The target answered, but not with what the protocol promises.
    #[error("protocol: {0}")]
    Protocol(String),
}

/// Errors from collection runs.
#[derive(Debug, Error)]
pub enum CollectError {
    #[error("plan: {0}")]
    BadPlan(String),
    #[error("plan requests {count} codes but the budget cap is {cap}")]
    BudgetExceeded { count: usize, cap: usize },
    #[error("transport failure after {attempts} attempts: {last}")]
    TransportExhausted { attempts: usize, last: String },
    #[error("no 4-8 digit code in SMS {sms:?}")]
    NoCode { sms: String },
    #[error(transparent)]
    Target(#[from] TargetError),
    #[error(transparent)]
    Sequence(#[from] RuleError),
}

/// Anything the collector can drive: register accounts, request and
/// consume codes, and steer the clock that paces requests.
pub trait OtpTarget {
    /// Creates an account; registering an existing account is an error
    /// ([`TargetError::AccountExists`]), which callers may tolerate.
    fn register(&mut self, account_id: &str, phone: &str) -> Result<(), TargetError>;

    /// Requests one OTP; returns the SMS body.
    fn request_otp(&mut self, account_id: &str) -> Result<String, TargetError>;

    /// Submits a code; `Ok(true)` means the target accepted it.
    fn consume(&mut self, account_id: &str, code: &str) -> Result<bool, TargetError>;

    /// Moves the target clock forward, returning the new reading.
    fn advance_clock(&mut self, seconds: u64) -> Result<u64, TargetError>;

    /// Current clock reading.
    fn now(&mut self) -> Result<u64, TargetError>;

    /// Whether [`OtpTarget::advance_clock`] actually steers time. When
    /// false the collector falls back to real sleeps and wall-clock
    /// timestamps.
    fn supports_clock_control(&self) -> bool {
        true
    }

    /// Short description used as the sequence source label.
    fn label(&self) -> String;
}

/// One collection campaign against one account.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CollectPlan {
    pub account_id: String,
    /// Requests to issue (and upper bound on requests actually issued).
    pub count: usize,
    /// Seconds between consecutive requests on the governing clock.
    pub interval: u64,
    /// Consume each received code right after parsing it.
    pub consume_each: bool,
    /// Hard budget; plans asking for more than this are rejected before
    /// any request. Raise it explicitly for long campaigns.
    pub budget_cap: usize,
}

impl CollectPlan {
    pub fn new(account_id: impl Into<String>, count: usize) -> Self {
        CollectPlan {
            account_id: account_id.into(),
            count,
            interval: DEFAULT_INTERVAL_SECONDS,
            consume_each: false,
            budget_cap: DEFAULT_BUDGET_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), CollectError> {
        if self.account_id.is_empty() {
            return Err(CollectError::BadPlan("account_id must be non-empty".into()));
        }
        if self.count == 0 {
            return Err(CollectError::BadPlan("count must be at least 1".into()));
        }
        if self.count > self.budget_cap {
            return Err(CollectError::BudgetExceeded {
                count: self.count,
                cap: self.budget_cap,
            });
        }
        Ok(())
    }
}

/// What a collection run produced: the sequence plus everything worth
/// telling the analyst about how it went.
#[derive(Debug, Clone)]
pub struct CollectOutcome {
    pub sequence: OtpSequence,
    /// Truncations, skipped records, retries.
    pub notes: Vec<String>,
    /// Request attempts actually issued (never exceeds the plan count).
    pub requests_issued: u64,
}

/// Extracts the OTP from an SMS body: the longest maximal decimal-digit
/// run whose length is 4..=8; ties go to the first occurrence. Runs
/// longer than eight digits are reference numbers, not codes.
pub fn parse_sms(text: &str) -> Result<String, CollectError> {
    let bytes = text.as_bytes();
    let mut best: Option<&str> = None;
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let run = &text[start..i];
            if (4..=8).contains(&run.len()) && best.is_none_or(|b| run.len() > b.len()) {
                best = Some(run);
            }
        } else {
            i += 1;
        }
    }
    best.map(str::to_string).ok_or_else(|| CollectError::NoCode {
        sms: text.to_string(),
    })
}

/// Runs one collection campaign.
///
/// Issues up to `plan.count` requests — the counting includes transport
/// retries, so the budget bound is unconditional — paced `plan.interval`
/// seconds apart on the governing clock. A quota rejection ends the run
/// early with a truncation note. An SMS without a parseable code is
/// skipped (with a note) but its request slot still advances.
pub fn collect(
    target: &mut dyn OtpTarget,
    plan: &CollectPlan,
) -> Result<CollectOutcome, CollectError> {
    plan.validate()?;
    ensure_registered(target, &plan.account_id)?;

    let mut notes = Vec::new();
    let mut records = Vec::new();
    let mut attempts = 0u64;
    let mut clock = target_now(target)?;

    'slots: for slot in 0..plan.count {
        if attempts >= plan.count as u64 {
            notes.push(format!(
                "request budget consumed by retries after {slot} of {} records",
                plan.count
            ));
            break;
        }
        if slot > 0 {
            clock = pace(target, plan.interval)?;
        }

        // Per-slot retry loop; every attempt counts against the budget.
        let mut slot_tries = 0;
        let sms = loop {
            attempts += 1;
            slot_tries += 1;
            match target.request_otp(&plan.account_id) {
                Ok(sms) => break sms,
                Err(TargetError::Quota) => {
                    notes.push(format!(
                        "quota exhausted after {} of {} requests; sequence truncated",
                        slot, plan.count
                    ));
                    break 'slots;
                }
                Err(TargetError::Transport(last)) => {
                    if slot_tries >= TRANSPORT_ATTEMPTS || attempts >= plan.count as u64 {
                        return Err(CollectError::TransportExhausted {
                            attempts: slot_tries,
                            last,
                        });
                    }
                    notes.push(format!("request {slot}: transport error, retrying: {last}"));
                }
                Err(other) => return Err(other.into()),
            }
        };

        match parse_sms(&sms) {
            Ok(code) => {
                let consumed = if plan.consume_each {
                    match target.consume(&plan.account_id, &code) {
                        Ok(valid) => valid,
                        Err(e) => {
                            notes.push(format!("request {slot}: consume failed: {e}"));
                            false
                        }
                    }
                } else {
                    false
                };
                records.push(OtpRecord {
                    index: slot as u64,
                    request_time: clock,
                    code,
                    consumed,
                    account_id: plan.account_id.clone(),
                });
            }
            Err(e) => notes.push(format!("request {slot}: skipped: {e}")),
        }
    }

    let sequence = OtpSequence::new(records, target.label())?;
    Ok(CollectOutcome {
        sequence,
        notes,
        requests_issued: attempts,
    })
}

/// Executes the renewal-policy probe matrix: for each probe gap and each
/// consume arm, six requests against a derived account
/// (`{account}-g{gap}-{c|n}`), spaced by the gap. Quota exhaustion or an
/// unparseable SMS marks that cell incomplete instead of failing the
/// probe.
pub fn run_renewal_probe(
    target: &mut dyn OtpTarget,
    account_id: &str,
) -> Result<RenewalProbeResult, CollectError> {
    if account_id.is_empty() {
        return Err(CollectError::BadPlan("account_id must be non-empty".into()));
    }
    let mut cells = Vec::new();
    for gap in PROBE_GAPS {
        for consume in [false, true] {
            let arm = if consume { 'c' } else { 'n' };
            let derived = format!("{account_id}-g{gap}-{arm}");
            ensure_registered(target, &derived)?;
            let mut codes = Vec::new();
            let mut complete = true;
            for i in 0..PROBE_REQUESTS_PER_ARM {
                if i > 0 {
                    pace(target, gap)?;
                }
                match target.request_otp(&derived) {
                    Ok(sms) => match parse_sms(&sms) {
                        Ok(code) => {
                            if consume {
                                let _ = target.consume(&derived, &code);
                            }
                            codes.push(code);
                        }
                        Err(_) => complete = false,
                    },
                    Err(TargetError::Quota) => {
                        complete = false;
                        break;
                    }
                    Err(other) => return Err(other.into()),
                }
            }
            cells.push(ProbeCell {
                gap_seconds: gap,
                consume,
                codes,
                complete,
            });
        }
    }
    Ok(RenewalProbeResult { cells })
}

/// Registers the account, tolerating one that already exists.
fn ensure_registered(target: &mut dyn OtpTarget, account_id: &str) -> Result<(), CollectError> {
    match target.register(account_id, COLLECTOR_PHONE) {
        Ok(()) | Err(TargetError::AccountExists(_)) => Ok(()),
        Err(e) => Err(e.into()),
    }
}

/// Waits out one pacing interval: simulated time when the target supports
/// clock control, a real sleep otherwise. Returns the clock reading that
/// timestamps the next request.
fn pace(target: &mut dyn OtpTarget, seconds: u64) -> Result<u64, CollectError> {
    if target.supports_clock_control() {
        Ok(target.advance_clock(seconds)?)
    } else {
        std::thread::sleep(std::time::Duration::from_secs(seconds));
        target_now(target)
    }
}

fn target_now(target: &mut dyn OtpTarget) -> Result<u64, CollectError> {
    if target.supports_clock_control() {
        Ok(target.now()?)
    } else {
        Ok(std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .unwrap_or_default()
            .as_secs())
    }
}

/// In-process target: the bundled harness behind the trait, with no HTTP
/// in between. This is what high-volume runs use.
pub struct DirectTarget {
    harness: Arc<Harness>,
}

impl DirectTarget {
    pub fn new(harness: Arc<Harness>) -> Self {
        DirectTarget { harness }
    }

    pub fn harness(&self) -> &Arc<Harness> {
        &self.harness
    }
}

fn map_harness_err(e: HarnessError) -> TargetError {
    match e {
        HarnessError::QuotaExceeded => TargetError::Quota,
        HarnessError::UnknownAccount(id) => TargetError::UnknownAccount(id),
        HarnessError::AccountExists(id) => TargetError::AccountExists(id),
        other => TargetError::Protocol(other.to_string()),
    }
}

impl OtpTarget for DirectTarget {
    fn register(&mut self, account_id: &str, phone: &str) -> Result<(), TargetError> {
        self.harness
            .register(account_id, phone)
            .map_err(map_harness_err)
    }

    fn request_otp(&mut self, account_id: &str) -> Result<String, TargetError> {
        self.harness.request_otp(account_id).map_err(map_harness_err)
    }

    fn consume(&mut self, account_id: &str, code: &str) -> Result<bool, TargetError> {
        self.harness
            .consume(account_id, code)
            .map_err(map_harness_err)
    }

    fn advance_clock(&mut self, seconds: u64) -> Result<u64, TargetError> {
        let delta = i64::try_from(seconds)
            .map_err(|_| TargetError::Protocol(format!("clock delta {seconds} too large")))?;
        self.harness.advance_clock(delta).map_err(map_harness_err)
    }

    fn now(&mut self) -> Result<u64, TargetError> {
        Ok(self.harness.now())
    }

    fn label(&self) -> String {
        format!("harness:{}", self.harness.config().profile.label())
    }
}

/// HTTP target: talks to a served harness at `host:port` through the
/// five-route JSON API.
pub struct HttpTarget {
    addr: String,
}

impl HttpTarget {
    pub fn new(addr: impl Into<String>) -> Self {
        HttpTarget { addr: addr.into() }
    }

    fn post(&self, path: &str, body: &Value) -> Result<(u16, Value), TargetError> {
        http_post(&self.addr, path, body).map_err(|e| TargetError::Transport(e.to_string()))
    }
}

/// Maps a non-2xx harness response onto the collector's error taxonomy.
fn http_error(status: u16, body: &Value) -> TargetError {
    let message = body["error"].as_str().unwrap_or("").to_string();
    match status {
        429 => TargetError::Quota,
        404 if message == "unknown account" => TargetError::UnknownAccount(message),
        409 => TargetError::AccountExists(message),
        _ => TargetError::Protocol(format!("status {status}: {message}")),
    }
}

impl OtpTarget for HttpTarget {
    fn register(&mut self, account_id: &str, phone: &str) -> Result<(), TargetError> {
        let (status, body) = self.post(
            "/accounts",
            &json!({"account_id": account_id, "phone": phone}),
        )?;
        match status {
            201 => Ok(()),
            _ => Err(http_error(status, &body)),
        }
    }

    fn request_otp(&mut self, account_id: &str) -> Result<String, TargetError> {
        let (status, body) = self.post("/otp/request", &json!({"account_id": account_id}))?;
        if status != 200 {
            return Err(http_error(status, &body));
        }
        body["sms"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| TargetError::Protocol("response lacks an \"sms\" field".into()))
    }

    fn consume(&mut self, account_id: &str, code: &str) -> Result<bool, TargetError> {
        let (status, body) =
            self.post("/otp/consume", &json!({"account_id": account_id, "code": code}))?;
        if status != 200 {
            return Err(http_error(status, &body));
        }
        body["valid"]
            .as_bool()
            .ok_or_else(|| TargetError::Protocol("response lacks a \"valid\" field".into()))
    }

    fn advance_clock(&mut self, seconds: u64) -> Result<u64, TargetError> {
        let (status, body) = self.post("/clock/advance", &json!({ "seconds": seconds }))?;
        if status != 200 {
            return Err(http_error(status, &body));
        }
        body["now"]
            .as_u64()
            .ok_or_else(|| TargetError::Protocol("response lacks a \"now\" field".into()))
    }

    fn now(&mut self) -> Result<u64, TargetError> {
        self.advance_clock(0)
    }

    fn label(&self) -> String {
        // The profile route is descriptive only; reachability problems
        // surface on the first real request instead.
        match http_get(&self.addr, "/profile") {
            Ok((200, body)) => {
                let kind = body["profile"]["kind"].as_str().unwrap_or("unknown");
                format!("http://{} ({kind})", self.addr)
            }
            _ => format!("http://{}", self.addr),
        }
    }
}
