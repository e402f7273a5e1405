//! Randomness-rule engine for collected OTP sequences.
//!
//! Takes an [`OtpSequence`] — an ordered run of one account's codes — and
//! evaluates it against a battery of weakness checks: static codes, fixed
//! repetition periods, consecutive repeats, binary rotation / append /
//! insert patterns, parity patterns, and generator re-simulation (constant
//! seeds and timestamp seeding). [`analyze`] runs the whole battery with
//! duplicate-finding suppression and returns an [`AnalysisReport`].
//!
//! Every [`Violation`] carries the record-index range it rests on, the
//! inferred parameters (period, repeat count, rotation direction, …), and
//! an upper bound on the probability that uniformly random codes would
//! have produced the same evidence. The engine is pure: identical input
//! sequence and config produce a byte-identical report.

mod checks;
mod renewal;
mod seqfile;

pub use checks::{
    check_binary_patterns, check_consecutive_repeats, check_constant_seed, check_fixed_period,
    check_parity_pattern, check_static, check_timestamp_seed, min_period, CheckOutcome, MinPeriod,
};
pub use renewal::{
    classify_renewal_policy, ProbeCell, RenewalClass, RenewalProbeResult, UnclassifiableError,
    PROBE_GAPS, PROBE_REQUESTS_PER_ARM,
};

use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prng::{OtpLength, PrngError, PrngSpec};

/// Errors from sequence construction, parsing, and rule checks.
#[derive(Debug, Error, PartialEq)]
pub enum RuleError {
    #[error("empty sequence")]
    EmptySequence,
    #[error("line {line}: {msg}")]
    BadLine { line: usize, msg: String },
    #[error("record {index}: account {found:?} differs from {first:?}")]
    MixedAccounts {
        index: usize,
        first: String,
        found: String,
    },
    #[error("record {index}: code {code:?} is not a 4-8 digit decimal string")]
    BadCode { index: usize, code: String },
    #[error("record {index}: code length {found} differs from {expected}")]
    MixedCodeLength {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("record {index}: request_time moves backwards")]
    NonMonotonicTime { index: usize },
    #[error("{check}: need {need} records, have {got}")]
    InsufficientData {
        check: &'static str,
        need: usize,
        got: usize,
    },
    #[error("invalid analysis config: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Prng(#[from] PrngError),
}

// ---------------------------------------------------------------------------
// Sequence model
// ---------------------------------------------------------------------------

/// One issued code as observed by the collector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OtpRecord {
    /// 0-based request ordinal assigned at collection time. May have gaps
    /// (skipped extractions still advance it).
    pub index: u64,
    /// Request timestamp in seconds (simulated-clock domain).
    pub request_time: u64,
    /// The extracted code: exactly L decimal digits.
    pub code: String,
    /// Whether the collector consumed (logged in with) this code.
    pub consumed: bool,
    /// Account the code was issued to.
    pub account_id: String,
}

/// A validated, ordered run of one account's codes at one code length.
///
/// Construction enforces the sequence invariants: non-empty, a single
/// account, a single code length in 4..=8 decimal digits, and
/// non-decreasing request times.
#[derive(Clone, Debug, PartialEq)]
pub struct OtpSequence {
    records: Vec<OtpRecord>,
    code_len: OtpLength,
    source_label: String,
}

impl OtpSequence {
    /// Validates `records` and wraps them as a sequence.
    pub fn new(
        records: Vec<OtpRecord>,
        source_label: impl Into<String>,
    ) -> Result<Self, RuleError> {
        let first = records.first().ok_or(RuleError::EmptySequence)?;
        let code_len = first.code.len();
        if !(4..=8).contains(&code_len) || !first.code.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RuleError::BadCode {
                index: 0,
                code: first.code.clone(),
            });
        }
        let account = first.account_id.clone();
        let mut prev_time = first.request_time;
        for (i, rec) in records.iter().enumerate().skip(1) {
            if !rec.code.bytes().all(|b| b.is_ascii_digit()) || rec.code.is_empty() {
                return Err(RuleError::BadCode {
                    index: i,
                    code: rec.code.clone(),
                });
            }
            if rec.code.len() != code_len {
                return Err(RuleError::MixedCodeLength {
                    index: i,
                    expected: code_len,
                    found: rec.code.len(),
                });
            }
            if rec.account_id != account {
                return Err(RuleError::MixedAccounts {
                    index: i,
                    first: account,
                    found: rec.account_id.clone(),
                });
            }
            if rec.request_time < prev_time {
                return Err(RuleError::NonMonotonicTime { index: i });
            }
            prev_time = rec.request_time;
        }
        Ok(OtpSequence {
            records,
            code_len: code_len as OtpLength,
            source_label: source_label.into(),
        })
    }

    /// Parses the tab-separated sequence file format.
    pub fn parse(text: &str, source_label: impl Into<String>) -> Result<Self, RuleError> {
        seqfile::parse(text, source_label)
    }

    /// Renders the sequence in the tab-separated file format.
    pub fn to_file_string(&self) -> String {
        seqfile::write(self)
    }

    pub fn records(&self) -> &[OtpRecord] {
        &self.records
    }

    /// The codes in order, as string slices.
    pub fn codes(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.code.as_str()).collect()
    }

    /// The codes in order, parsed to integers.
    pub fn values(&self) -> Vec<u64> {
        self.records
            .iter()
            .map(|r| r.code.parse().expect("validated digits"))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    /// Always false: an empty sequence cannot be constructed.
    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn code_len(&self) -> OtpLength {
        self.code_len
    }

    pub fn account_id(&self) -> &str {
        &self.records[0].account_id
    }

    pub fn source_label(&self) -> &str {
        &self.source_label
    }

    pub fn set_source_label(&mut self, label: impl Into<String>) {
        self.source_label = label.into();
    }
}

// ---------------------------------------------------------------------------
// Findings
// ---------------------------------------------------------------------------

/// The rule a violation was raised under.
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Rule {
    /// Static code: the same value issued for every request.
    R1,
    /// Fixed repetition period: the stream repeats after N codes.
    R2_1,
    /// Consecutive repeats: each value issued n times in a row.
    R2_2,
    /// Successive codes are one-step bit rotations of each other.
    #[serde(rename = "R2_3_shift")]
    R2_3Shift,
    /// Successive codes follow v' = 2v + b with a fresh low bit b.
    #[serde(rename = "R2_3_append")]
    R2_3Append,
    /// Successive codes insert one bit at a fixed binary position.
    #[serde(rename = "R2_3_insert")]
    R2_3Insert,
    /// Code parity is constant or strictly alternating.
    #[serde(rename = "R2_3_parity")]
    R2_3Parity,
    /// The stream replays a known generator under a constant seed.
    #[serde(rename = "R3_const_seed")]
    R3ConstSeed,
    /// Each code is the first draw of a generator seeded with the
    /// request timestamp (plus a fixed clock offset).
    #[serde(rename = "R3_time_seed")]
    R3TimeSeed,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Rule::R1 => "R1",
            Rule::R2_1 => "R2_1",
            Rule::R2_2 => "R2_2",
            Rule::R2_3Shift => "R2_3_shift",
            Rule::R2_3Append => "R2_3_append",
            Rule::R2_3Insert => "R2_3_insert",
            Rule::R2_3Parity => "R2_3_parity",
            Rule::R3ConstSeed => "R3_const_seed",
            Rule::R3TimeSeed => "R3_time_seed",
        };
        f.write_str(name)
    }
}

/// Rotation direction for shift findings. Anticlockwise is rotate-left
/// (towards the most significant bit), clockwise is rotate-right.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RotationDirection {
    Anticlockwise,
    Clockwise,
}

impl fmt::Display for RotationDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RotationDirection::Anticlockwise => "anticlockwise",
            RotationDirection::Clockwise => "clockwise",
        })
    }
}

/// Which parity pattern a parity finding observed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParityPattern {
    AllEven,
    AllOdd,
    Alternating,
}

impl fmt::Display for ParityPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParityPattern::AllEven => "all even",
            ParityPattern::AllOdd => "all odd",
            ParityPattern::Alternating => "alternating",
        })
    }
}

/// Where a finding rests and what was inferred from it.
///
/// `start_index` / `end_index` are inclusive record ordinals (the `index`
/// field of the underlying records). The optional fields carry whichever
/// parameters the rule inferred.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub start_index: u64,
    pub end_index: u64,
    /// Repetition period (fixed-period and minimal-period findings).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub period: Option<usize>,
    /// Consecutive-repeat run length n.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub repeat_n: Option<usize>,
    /// Rotation direction for shift findings.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub direction: Option<RotationDirection>,
    /// Bit width the binary checks operated at.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub width: Option<u32>,
    /// Fixed insertion position (0 = before the most significant bit).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub insert_position: Option<usize>,
    /// Appended low bits, most recent last, for append findings.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub appended_bits: Option<String>,
    /// Observed parity pattern.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub parity_pattern: Option<ParityPattern>,
    /// Generator template that reproduced the stream.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub template: Option<String>,
    /// Seed of the reproducing generator.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    /// Positional offset of a replayed run inside the sequence.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub match_offset: Option<usize>,
    /// Clock offset (seconds) for timestamp-seed findings.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub clock_offset: Option<i64>,
    /// Length of the matching run, where shorter than the sequence.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub run_len: Option<usize>,
    /// False when the finding needs more data to be conclusive.
    #[serde(default = "default_true")]
    pub confirmed: bool,
}

fn default_true() -> bool {
    true
}

impl Default for Evidence {
    fn default() -> Self {
        Evidence {
            start_index: 0,
            end_index: 0,
            period: None,
            repeat_n: None,
            direction: None,
            width: None,
            insert_position: None,
            appended_bits: None,
            parity_pattern: None,
            template: None,
            seed: None,
            match_offset: None,
            clock_offset: None,
            run_len: None,
            confirmed: true,
        }
    }
}

impl Evidence {
    /// Evidence spanning the records at positional indices `lo..=hi`.
    pub(crate) fn span(records: &[OtpRecord], lo: usize, hi: usize) -> Self {
        Evidence {
            start_index: records[lo].index,
            end_index: records[hi].index,
            ..Evidence::default()
        }
    }
}

/// One rule finding with its evidence and false-positive bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub rule: Rule,
    pub evidence: Evidence,
    /// Upper bound on the probability that uniformly random codes would
    /// produce the same evidence. Clamped into (0, 1]; see
    /// `chance_log10` for bounds too small for an `f64`.
    pub chance_probability: f64,
    /// Base-10 logarithm of the bound, kept exact where the probability
    /// itself underflows.
    pub chance_log10: f64,
}

impl Violation {
    /// Builds a violation from a log10 probability bound, clamping the
    /// linear probability into (0, 1].
    pub(crate) fn from_log10(rule: Rule, evidence: Evidence, chance_log10: f64) -> Self {
        let chance_log10 = chance_log10.min(0.0);
        let p = 10f64.powf(chance_log10);
        Violation {
            rule,
            evidence,
            chance_probability: if p > 0.0 { p.min(1.0) } else { f64::MIN_POSITIVE },
            chance_log10,
        }
    }
}

// ---------------------------------------------------------------------------
// Configuration and report
// ---------------------------------------------------------------------------

/// Tunable budgets and search parameters for [`analyze`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    /// Period N for the fixed-period comparison (needs 2N records).
    pub period_n: usize,
    /// Static probe shape: (initial probe, additional confirmation
    /// records). Default (5, 15): probe at 5, confirm at 20.
    pub static_probe: (usize, usize),
    /// Largest consecutive-repeat run length reported as a violation.
    pub repeat_n_max: usize,
    /// Number of leading codes examined by the parity check.
    pub parity_window: usize,
    /// Number of leading codes examined by the binary-pattern checks.
    pub binary_window: usize,
    /// Record budget of the constant-seed scan.
    pub rule3_collect: usize,
    /// Simulated-run length for the constant-seed scan.
    pub rule3_sim_count: usize,
    /// Generator templates re-simulated by the seed checks.
    pub rule3_templates: Vec<PrngSpec>,
    /// Clock-offset window (± seconds) for the timestamp-seed check.
    pub time_seed_window: i64,
    /// Minimum consecutive matches for a timestamp-seed finding.
    pub time_seed_min_run: usize,
    /// Seed range for brute-force search tooling.
    pub seed_space: Range<u64>,
    /// Collection cap: the most requests a collection run may issue.
    pub max_requests: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            period_n: 624,
            static_probe: (5, 15),
            repeat_n_max: 8,
            parity_window: 20,
            binary_window: 20,
            rule3_collect: 1000,
            rule3_sim_count: 50,
            rule3_templates: vec![PrngSpec::c_rand(1)],
            time_seed_window: 5,
            time_seed_min_run: 3,
            seed_space: 0..(1 << 24),
            max_requests: 1000,
        }
    }
}

impl AnalysisConfig {
    /// Checks the config invariants: positive counts and a simulation
    /// length that fits the collection budget.
    pub fn validate(&self) -> Result<(), RuleError> {
        let positives: [(&str, usize); 8] = [
            ("period_n", self.period_n),
            ("static_probe.0", self.static_probe.0),
            ("repeat_n_max", self.repeat_n_max),
            ("parity_window", self.parity_window),
            ("binary_window", self.binary_window),
            ("rule3_sim_count", self.rule3_sim_count),
            ("time_seed_min_run", self.time_seed_min_run),
            ("max_requests", self.max_requests),
        ];
        for (name, value) in positives {
            if value == 0 {
                return Err(RuleError::BadConfig(format!("{name} must be positive")));
            }
        }
        if self.rule3_sim_count > self.rule3_collect {
            return Err(RuleError::BadConfig(format!(
                "rule3_sim_count ({}) exceeds rule3_collect ({})",
                self.rule3_sim_count, self.rule3_collect
            )));
        }
        if self.time_seed_window < 0 {
            return Err(RuleError::BadConfig(
                "time_seed_window must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Full output of [`analyze`]: findings plus data-sufficiency notes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    /// Where the sequence came from (file path, account, …).
    pub source: String,
    /// The configuration the analysis ran under.
    pub config: AnalysisConfig,
    /// All findings, in check order.
    pub violations: Vec<Violation>,
    /// Per-check diagnostics: insufficient data, suppressions, skips.
    pub notes: Vec<String>,
}

impl AnalysisReport {
    /// Serializes the report as pretty-printed JSON. Deterministic: the
    /// same report always produces byte-identical output.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

// ---------------------------------------------------------------------------
// The full battery
// ---------------------------------------------------------------------------

/// Runs every applicable check over `seq` in a fixed order — static,
/// consecutive repeats, fixed period, binary patterns, parity, seed
/// re-simulation — and aggregates findings and diagnostics.
///
/// Suppressions keep one underlying defect from surfacing as several
/// findings: an all-identical sequence reports the static rule only, a
/// period-1 result defers to the static rule, a fixed-period finding
/// absorbs the minimal-period finding, and the parity check (the weakest
/// evidence class) is consulted only when no structural finding exists.
///
/// Pure: identical `(seq, cfg)` yield identical reports.
pub fn analyze(seq: &OtpSequence, cfg: &AnalysisConfig) -> AnalysisReport {
    let mut violations: Vec<Violation> = Vec::new();
    let mut notes: Vec<String> = Vec::new();

    // Static codes. A hit makes every other check redundant: all the
    // remaining patterns are statements about how codes *change*.
    match check_static(seq, cfg.static_probe) {
        Err(e) => notes.push(e.to_string()),
        Ok(Some(v)) => {
            let confirmed = v.evidence.confirmed;
            violations.push(v);
            notes.push(if confirmed {
                "static code: remaining checks suppressed".to_string()
            } else {
                format!(
                    "static code suspected from {} identical records (confirmation needs {}); \
                     remaining checks suppressed",
                    seq.len(),
                    cfg.static_probe.0 + cfg.static_probe.1
                )
            });
            return AnalysisReport {
                source: seq.source_label().to_string(),
                config: cfg.clone(),
                violations,
                notes,
            };
        }
        Ok(None) => {}
    }

    // Consecutive repeats.
    let outcome = check_consecutive_repeats(seq, cfg.repeat_n_max);
    violations.extend(outcome.violations);
    notes.extend(outcome.notes);

    // Fixed period, with the minimal-period scan as generalization.
    let mp = min_period(seq);
    let mut period_reported = false;
    match check_fixed_period(seq, cfg.period_n) {
        Err(e) => notes.push(e.to_string()),
        Ok(Some(v)) => {
            violations.push(v);
            period_reported = true;
        }
        Ok(None) => {}
    }
    if let Some(mp) = mp {
        if mp.period == 1 {
            // All codes identical; the static check owns this shape. Only
            // reachable when the sequence was too short for the probe.
            if seq.len() < cfg.static_probe.0 {
                notes.push("all codes identical (period 1); covered by the static check".into());
            }
        } else if !period_reported {
            if mp.complete {
                let len = seq.len();
                let forced = (len - mp.period) as f64;
                let mut ev = Evidence::span(seq.records(), 0, len - 1);
                ev.period = Some(mp.period);
                violations.push(Violation::from_log10(
                    Rule::R2_1,
                    ev,
                    -f64::from(seq.code_len()) * forced,
                ));
            } else {
                notes.push(format!(
                    "possible repeat period {}: have {} records, need {} to confirm",
                    mp.period,
                    seq.len(),
                    2 * mp.period
                ));
            }
        }
    }

    // Binary patterns: rotation, append, insert.
    let outcome = check_binary_patterns(seq, cfg.binary_window);
    violations.extend(outcome.violations);
    notes.extend(outcome.notes);

    // Parity. The weakest evidence class (a few bits), so it is consulted
    // only when nothing structural was found; any constant sequence, and
    // many rotation windows, would otherwise double-report here.
    if violations.is_empty() {
        match check_parity_pattern(seq, cfg.parity_window) {
            Err(e) => notes.push(e.to_string()),
            Ok(Some(v)) => violations.push(v),
            Ok(None) => {}
        }
    } else {
        notes.push("parity check skipped: a structural finding is already present".into());
    }

    // Generator re-simulation: constant seeds, then timestamp seeding.
    let outcome = check_constant_seed(seq, &cfg.rule3_templates, cfg.rule3_sim_count, cfg.rule3_collect);
    violations.extend(outcome.violations);
    notes.extend(outcome.notes);

    let outcome = check_timestamp_seed(
        seq,
        &cfg.rule3_templates,
        cfg.time_seed_window,
        cfg.time_seed_min_run,
    );
    violations.extend(outcome.violations);
    notes.extend(outcome.notes);

    AnalysisReport {
        source: seq.source_label().to_string(),
        config: cfg.clone(),
        violations,
        notes,
    }
}
