//! The individual randomness checks.
//!
//! Each check examines one weakness shape. Checks that the battery can
//! only run with enough data return `Err(InsufficientData)`; checks that
//! degrade gracefully return a [`CheckOutcome`] whose notes record what
//! was skipped and why.

use std::f64::consts::LOG10_2;

use super::{
    Evidence, OtpSequence, ParityPattern, RotationDirection, Rule, RuleError, Violation,
};
use crate::prng::{otp_modulus, Algorithm, PrngSpec};
use crate::recovery::{timestamp_seed_match, Recovered};

/// Findings and diagnostics from one check.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CheckOutcome {
    pub violations: Vec<Violation>,
    pub notes: Vec<String>,
}

impl CheckOutcome {
    fn note(msg: impl Into<String>) -> Self {
        CheckOutcome {
            violations: Vec::new(),
            notes: vec![msg.into()],
        }
    }
}

// ---------------------------------------------------------------------------
// Static codes
// ---------------------------------------------------------------------------

/// Two-stage static-code probe.
///
/// `probe` is `(probe_len, confirm_extra)`: if the first `probe_len`
/// codes are identical, the finding is confirmed once
/// `probe_len + confirm_extra` identical codes are seen. With fewer
/// records than that (but at least `probe_len`, all identical) the
/// finding is returned unconfirmed, flagged as needing more data.
pub fn check_static(
    seq: &OtpSequence,
    probe: (usize, usize),
) -> Result<Option<Violation>, RuleError> {
    let (probe_len, confirm_extra) = probe;
    let codes = seq.codes();
    let len = codes.len();
    if len < probe_len {
        return Err(RuleError::InsufficientData {
            check: "static probe",
            need: probe_len,
            got: len,
        });
    }
    let first = codes[0];
    if codes[1..probe_len].iter().any(|&c| c != first) {
        return Ok(None);
    }
    let confirm_total = probe_len + confirm_extra;
    let l = f64::from(seq.code_len());
    if len >= confirm_total {
        if codes[probe_len..confirm_total].iter().all(|&c| c == first) {
            let mut ev = Evidence::span(seq.records(), 0, confirm_total - 1);
            ev.run_len = Some(confirm_total);
            Ok(Some(Violation::from_log10(
                Rule::R1,
                ev,
                -l * (confirm_total as f64 - 1.0),
            )))
        } else {
            Ok(None)
        }
    } else if codes[probe_len..].iter().all(|&c| c == first) {
        let mut ev = Evidence::span(seq.records(), 0, len - 1);
        ev.confirmed = false;
        ev.run_len = Some(len);
        Ok(Some(Violation::from_log10(
            Rule::R1,
            ev,
            -l * (len as f64 - 1.0),
        )))
    } else {
        Ok(None)
    }
}

// ---------------------------------------------------------------------------
// Periods
// ---------------------------------------------------------------------------

/// Fixed-period comparison: the second block of `n` codes replays the
/// first block exactly.
pub fn check_fixed_period(seq: &OtpSequence, n: usize) -> Result<Option<Violation>, RuleError> {
    let codes = seq.codes();
    if codes.len() < 2 * n {
        return Err(RuleError::InsufficientData {
            check: "fixed-period check",
            need: 2 * n,
            got: codes.len(),
        });
    }
    if codes[..n] == codes[n..2 * n] {
        let mut ev = Evidence::span(seq.records(), 0, 2 * n - 1);
        ev.period = Some(n);
        Ok(Some(Violation::from_log10(
            Rule::R2_1,
            ev,
            -f64::from(seq.code_len()) * n as f64,
        )))
    } else {
        Ok(None)
    }
}

/// A minimal-period scan result.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MinPeriod {
    /// Smallest p ≥ 1 with `code[i] == code[i - p]` for every valid i.
    pub period: usize,
    /// True when at least two full cycles were observed (len ≥ 2p);
    /// false marks a consistent but unconfirmed period.
    pub complete: bool,
}

/// Finds the smallest repetition period of the whole sequence, if any
/// period shorter than the sequence itself fits.
pub fn min_period(seq: &OtpSequence) -> Option<MinPeriod> {
    let codes = seq.codes();
    let len = codes.len();
    for p in 1..len {
        if (p..len).all(|i| codes[i] == codes[i - p]) {
            return Some(MinPeriod {
                period: p,
                complete: len >= 2 * p,
            });
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Consecutive repeats
// ---------------------------------------------------------------------------

/// Consecutive-repeat check: the sequence is a concatenation of runs of
/// identical codes with one consistent run length n ≥ 2.
///
/// The final run may be cut short by the end of collection, but a second
/// complete run is required before n counts as established — a lone run
/// followed by a shorter one reads as coincidence and only earns a note.
/// A single run spanning the whole sequence is left to the static check.
pub fn check_consecutive_repeats(seq: &OtpSequence, repeat_n_max: usize) -> CheckOutcome {
    let codes = seq.codes();
    let len = codes.len();
    if len < 4 {
        return CheckOutcome::note(format!(
            "consecutive-repeat check skipped: need 4 records, have {len}"
        ));
    }
    let mut runs: Vec<usize> = Vec::new();
    let mut run = 1usize;
    for i in 1..len {
        if codes[i] == codes[i - 1] {
            run += 1;
        } else {
            runs.push(run);
            run = 1;
        }
    }
    runs.push(run);

    if runs.len() == 1 {
        return CheckOutcome::note(format!(
            "single run of {len} identical codes; left to the static check"
        ));
    }
    let n = runs[0];
    let full = &runs[..runs.len() - 1];
    let last = *runs.last().expect("at least two runs");
    if full.iter().any(|&r| r != n) || last > n {
        return CheckOutcome::note(format!(
            "inconsistent consecutive-repeat run lengths {runs:?}; no single n"
        ));
    }
    if n < 2 {
        // Every code fresh: nothing to report.
        return CheckOutcome::default();
    }
    let complete_runs = if last == n { runs.len() } else { runs.len() - 1 };
    if complete_runs < 2 {
        return CheckOutcome::note(format!(
            "one complete run of {n} identical codes; a second run would confirm the repeat length"
        ));
    }
    if n > repeat_n_max {
        return CheckOutcome::note(format!(
            "consistent repeat run length {n} exceeds the configured maximum {repeat_n_max}"
        ));
    }
    let forced = (len - runs.len()) as f64;
    let mut ev = Evidence::span(seq.records(), 0, len - 1);
    ev.repeat_n = Some(n);
    CheckOutcome {
        violations: vec![Violation::from_log10(
            Rule::R2_2,
            ev,
            -f64::from(seq.code_len()) * forced,
        )],
        notes: Vec::new(),
    }
}

// ---------------------------------------------------------------------------
// Binary patterns
// ---------------------------------------------------------------------------

/// Binary-pattern checks over the first `min(binary_window, len)` codes:
/// one-step rotation at a fixed width, low-bit append (v' = 2v + b), and
/// single-bit insertion at a fixed position.
///
/// The bit width is fixed to the first code's bit length; that makes
/// rotation well-defined, and a diagnostic notes when later codes fall
/// outside it. An append is the degenerate end-position insertion, so an
/// append finding suppresses the insert family.
pub fn check_binary_patterns(seq: &OtpSequence, binary_window: usize) -> CheckOutcome {
    let len = seq.len();
    if len < 3 {
        return CheckOutcome::note(format!(
            "binary-pattern checks skipped: need 3 records, have {len}"
        ));
    }
    let window = binary_window.min(len);
    if window < 3 {
        return CheckOutcome::note(format!(
            "binary-pattern checks skipped: window {window} is too small"
        ));
    }
    let values = &seq.values()[..window];
    let v0 = values[0];
    if v0 == 0 {
        return CheckOutcome::note(
            "binary-pattern checks skipped: first code is 0, bit width undefined".to_string(),
        );
    }
    let width = 64 - v0.leading_zeros();
    let l = f64::from(seq.code_len());
    let pairs = (window - 1) as f64;
    let mut out = CheckOutcome::default();

    // Rotation, in one consistent direction across the window.
    if values.iter().any(|&v| v >= 1u64 << width) {
        out.notes.push(format!(
            "codes after index 0 exceed {width} bits; rotation check not applicable at the first code's width"
        ));
    } else {
        let mask = (1u64 << width) - 1;
        let rotl = |v: u64| ((v << 1) | (v >> (width - 1))) & mask;
        let rotr = |v: u64| (v >> 1) | ((v & 1) << (width - 1));
        let direction = if (1..window).all(|i| values[i] == rotl(values[i - 1])) {
            Some(RotationDirection::Anticlockwise)
        } else if (1..window).all(|i| values[i] == rotr(values[i - 1])) {
            Some(RotationDirection::Clockwise)
        } else {
            None
        };
        if let Some(direction) = direction {
            let mut ev = Evidence::span(seq.records(), 0, window - 1);
            ev.direction = Some(direction);
            ev.width = Some(width);
            out.violations.push(Violation::from_log10(
                Rule::R2_3Shift,
                ev,
                LOG10_2 - l * pairs,
            ));
        }
    }

    // Append: each code doubles the previous and gains a fresh low bit,
    // truncated to the code length.
    let modulus = otp_modulus(seq.code_len()).expect("validated length");
    let mut bits = String::with_capacity(window - 1);
    let append_ok = (1..window).all(|i| {
        let doubled = values[i - 1] * 2 % modulus;
        if values[i] == doubled {
            bits.push('0');
            true
        } else if values[i] == (doubled + 1) % modulus {
            bits.push('1');
            true
        } else {
            false
        }
    });
    if append_ok {
        let mut ev = Evidence::span(seq.records(), 0, window - 1);
        ev.appended_bits = Some(bits);
        out.violations.push(Violation::from_log10(
            Rule::R2_3Append,
            ev,
            pairs * (LOG10_2 - l),
        ));
    } else if let Some(k) = (0..=width as usize).find(|&k| insert_consistent(values, k)) {
        let mut ev = Evidence::span(seq.records(), 0, window - 1);
        ev.insert_position = Some(k);
        ev.width = Some(width);
        out.violations.push(Violation::from_log10(
            Rule::R2_3Insert,
            ev,
            (f64::from(width) + 1.0).log10() + pairs * (LOG10_2 - l),
        ));
    }
    out
}

/// True when every successive pair's binary (no leading zeros) is the
/// previous binary with exactly one bit inserted at position `k`,
/// counted from the most significant end.
fn insert_consistent(values: &[u64], k: usize) -> bool {
    values.windows(2).all(|pair| {
        let s = format!("{:b}", pair[0]);
        if k > s.len() {
            return false;
        }
        let t = format!("{:b}", pair[1]);
        t.len() == s.len() + 1 && t[..k] == s[..k] && t[k + 1..] == s[k..]
    })
}

// ---------------------------------------------------------------------------
// Parity
// ---------------------------------------------------------------------------

/// Parity-pattern check over the first `window` codes: all even, all
/// odd, or strictly alternating, judging by the lowest binary bit.
pub fn check_parity_pattern(
    seq: &OtpSequence,
    window: usize,
) -> Result<Option<Violation>, RuleError> {
    let len = seq.len();
    if len < window {
        return Err(RuleError::InsufficientData {
            check: "parity check",
            need: window,
            got: len,
        });
    }
    let parities: Vec<u8> = seq.values()[..window].iter().map(|v| (v & 1) as u8).collect();
    let pattern = if parities.iter().all(|&p| p == 0) {
        Some(ParityPattern::AllEven)
    } else if parities.iter().all(|&p| p == 1) {
        Some(ParityPattern::AllOdd)
    } else if parities.windows(2).all(|w| w[0] != w[1]) {
        Some(ParityPattern::Alternating)
    } else {
        None
    };
    Ok(pattern.map(|parity| {
        let mut ev = Evidence::span(seq.records(), 0, window - 1);
        ev.parity_pattern = Some(parity);
        // Three pattern families, each hit by chance 2^(1-window).
        Violation::from_log10(
            Rule::R2_3Parity,
            ev,
            3f64.log10() + (1.0 - window as f64) * LOG10_2,
        )
    }))
}

// ---------------------------------------------------------------------------
// Generator re-simulation
// ---------------------------------------------------------------------------

/// Constant-seed check: for each template, simulate `sim_count` codes at
/// the sequence's length and look for that run appearing contiguously
/// within the first `min(len, collect_cap)` observed codes.
pub fn check_constant_seed(
    seq: &OtpSequence,
    templates: &[PrngSpec],
    sim_count: usize,
    collect_cap: usize,
) -> CheckOutcome {
    let mut out = CheckOutcome::default();
    let codes = seq.codes();
    let region = codes.len().min(collect_cap);
    if region < sim_count {
        out.notes.push(format!(
            "constant-seed check skipped: need {sim_count} records, have {region}"
        ));
        return out;
    }
    let codes = &codes[..region];
    let l = f64::from(seq.code_len());
    for template in templates {
        if matches!(template.algorithm, Algorithm::OsCsprng) {
            out.notes.push(format!(
                "constant-seed check: template {} is not simulable; skipped",
                template.label()
            ));
            continue;
        }
        let sim = match template
            .with_otp_length(seq.code_len())
            .and_then(|t| t.otp_stream(sim_count))
        {
            Ok(sim) => sim,
            Err(e) => {
                out.notes.push(format!(
                    "constant-seed check: template {}: {e}",
                    template.label()
                ));
                continue;
            }
        };
        let sim: Vec<&str> = sim.iter().map(String::as_str).collect();
        if let Some(offset) =
            (0..=region - sim_count).find(|&off| codes[off..off + sim_count] == sim[..])
        {
            let mut ev = Evidence::span(seq.records(), offset, offset + sim_count - 1);
            ev.template = Some(template.label());
            ev.seed = template.seed;
            ev.match_offset = Some(offset);
            ev.run_len = Some(sim_count);
            let positions = (region - sim_count + 1) as f64;
            out.violations.push(Violation::from_log10(
                Rule::R3ConstSeed,
                ev,
                positions.log10() - l * sim_count as f64,
            ));
        }
    }
    out
}

/// Timestamp-seed check: for each template, test whether each code is
/// the first draw of the generator seeded with its own request time plus
/// one fixed clock offset within `±window` seconds, over at least
/// `min_run` consecutive records.
pub fn check_timestamp_seed(
    seq: &OtpSequence,
    templates: &[PrngSpec],
    window: i64,
    min_run: usize,
) -> CheckOutcome {
    let mut out = CheckOutcome::default();
    let len = seq.len();
    if len < min_run {
        out.notes.push(format!(
            "timestamp-seed check skipped: need {min_run} records, have {len}"
        ));
        return out;
    }
    let observations: Vec<(u64, String)> = seq
        .records()
        .iter()
        .map(|r| (r.request_time, r.code.clone()))
        .collect();
    let l = f64::from(seq.code_len());
    for template in templates {
        if matches!(template.algorithm, Algorithm::OsCsprng) {
            out.notes.push(format!(
                "timestamp-seed check: template {} is not simulable; skipped",
                template.label()
            ));
            continue;
        }
        let template_at_len = match template.with_otp_length(seq.code_len()) {
            Ok(t) => t,
            Err(e) => {
                out.notes.push(format!(
                    "timestamp-seed check: template {}: {e}",
                    template.label()
                ));
                continue;
            }
        };
        match timestamp_seed_match(&template_at_len, &observations, window, min_run) {
            Ok(result) => {
                if let Some(Recovered::ClockOffset {
                    offset,
                    run_start,
                    run_len,
                }) = result.candidates.first()
                {
                    let (run_start, run_len) = (*run_start, *run_len);
                    let mut ev = Evidence::span(seq.records(), run_start, run_start + run_len - 1);
                    ev.template = Some(template.label());
                    ev.clock_offset = Some(*offset);
                    ev.run_len = Some(run_len);
                    let offsets = (2 * window + 1) as f64;
                    let positions = (len - run_len + 1) as f64;
                    out.violations.push(Violation::from_log10(
                        Rule::R3TimeSeed,
                        ev,
                        (offsets * positions).log10() - l * run_len as f64,
                    ));
                }
            }
            Err(e) => out.notes.push(format!(
                "timestamp-seed check: template {}: {e}",
                template.label()
            )),
        }
    }
    out
}
