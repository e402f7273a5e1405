//! State and seed recovery from observed generator outputs.
//!
//! Four attacks are implemented, mirroring what a desk audit needs:
//!
//! - [`mt_untemper`] / [`mt_clone`] — invert MT19937 output tempering and
//!   rebuild the full 624-word state from exactly 624 consecutive outputs;
//!   the cloned generator predicts every later output.
//! - [`lcg_recover_params`] — recover `(a, c)` of `S' = aS + c mod m` from
//!   three or more consecutive raw states, with bounded candidate
//!   enumeration when the difference is not invertible mod `m`.
//! - [`java_state_recover`] — recover the 48-bit Java LCG state from two
//!   truncated 32-bit outputs by searching the 2^16 hidden low bits.
//! - [`seed_bruteforce`] / [`timestamp_seed_match`] — search a seed space
//!   (or a clock window around per-request timestamps) for a seed whose
//!   OTP stream matches observed codes.

use std::ops::Range;

use rayon::prelude::*;
use thiserror::Error;

use crate::prng::mt19937 as mt;
use crate::prng::{GeneratorState, LcgParams, Mt19937, PrngError, PrngSpec};

/// Errors raised by recovery operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum RecoveryError {
    #[error("need exactly {expected} outputs, got {got}")]
    WrongOutputCount { expected: usize, got: usize },
    #[error("need at least {need} observations, got {got}")]
    TooFewOutputs { need: usize, got: usize },
    #[error("output {value} is not a valid state modulo {modulus}")]
    OutputOutOfRange { value: u64, modulus: u64 },
    #[error("ambiguous: gcd {gcd} yields {candidates} parameter candidates (cap {cap})")]
    Ambiguous { gcd: u64, candidates: u64, cap: u64 },
    #[error("observations are not consistent with this generator")]
    NotThisGenerator,
    #[error("template {0} cannot be brute-forced")]
    UnsupportedTemplate(String),
    #[error("observed code {0:?} is not a {1}-digit decimal code")]
    BadObservation(String, u8),
    #[error(transparent)]
    Prng(#[from] PrngError),
}

/// What a recovery produced.
#[derive(Debug, Clone)]
pub enum Recovered {
    /// A runnable generator state. Positioned so its next output is the
    /// first *not yet observed* value.
    State(GeneratorState),
    /// A seed from a brute-force search.
    Seed(u64),
    /// LCG parameters consistent with the observations.
    LcgParams { a: u64, c: u64 },
    /// A per-request clock offset: each request's seed was its own
    /// timestamp plus this many seconds.
    ClockOffset {
        offset: i64,
        run_start: usize,
        run_len: usize,
    },
}

/// Result of a recovery operation.
///
/// `candidates` holds every recovery consistent with the observations, in
/// deterministic order (ascending seed / parameter / offset) regardless of
/// worker count. `verification_depth` counts how many observations each
/// surviving candidate was checked against.
#[derive(Debug, Clone)]
pub struct RecoveryResult {
    pub candidates: Vec<Recovered>,
    pub trials_examined: u64,
    pub verification_depth: usize,
}

/// Default cap on the parameter-candidate enumeration of
/// [`lcg_recover_params`].
pub const DEFAULT_CANDIDATE_CAP: u64 = 65_536;

/// Default seed space of [`seed_bruteforce`].
pub const DEFAULT_SEED_SPACE: Range<u64> = 0..(1 << 24);

/// Default minimum consecutive matches for [`timestamp_seed_match`].
pub const DEFAULT_TIME_MIN_RUN: usize = 3;

// ---------------------------------------------------------------------------
// MT19937
// ---------------------------------------------------------------------------

/// Inverts the MT19937 tempering chain: for every 32-bit output there is
/// exactly one pre-tempering state word.
pub fn mt_untemper(word: u32) -> u32 {
    let mut y = word;
    y = invert_xor_rshift(y, mt::TEMPER_L);
    y = invert_xor_lshift_mask(y, mt::TEMPER_T, mt::TEMPER_C);
    y = invert_xor_lshift_mask(y, mt::TEMPER_S, mt::TEMPER_B);
    y = invert_xor_rshift(y, mt::TEMPER_U);
    y
}

/// Solves `y = x ^ (x >> shift)` for `x`. The top `shift` bits of `x`
/// equal `y`'s; each iteration recovers the next block downward.
fn invert_xor_rshift(y: u32, shift: u32) -> u32 {
    let mut x = y;
    for _ in 0..32u32.div_ceil(shift) {
        x = y ^ (x >> shift);
    }
    x
}

/// Solves `y = x ^ ((x << shift) & mask)` for `x`, working upward from the
/// untouched low `shift` bits.
fn invert_xor_lshift_mask(y: u32, shift: u32, mask: u32) -> u32 {
    let mut x = y;
    for _ in 0..32u32.div_ceil(shift) {
        x = y ^ ((x << shift) & mask);
    }
    x
}

/// Rebuilds a full MT19937 generator from exactly 624 consecutive outputs.
///
/// Any 624-output window works, not just the first: untempered outputs form
/// a sliding window of the state recurrence, and the in-place twist
/// continues it exactly. The returned generator's next output is the first
/// output *after* the observed window.
pub fn mt_clone(outputs: &[u32]) -> Result<RecoveryResult, RecoveryError> {
    if outputs.len() != mt::N {
        return Err(RecoveryError::WrongOutputCount {
            expected: mt::N,
            got: outputs.len(),
        });
    }
    let mut state = [0u32; mt::N];
    for (slot, &word) in state.iter_mut().zip(outputs) {
        *slot = mt_untemper(word);
        // Round-trip check: tempering the recovered word must reproduce the
        // observation. This is the per-output verification step.
        debug_assert_eq!(mt::temper(*slot), word);
    }
    let clone = Mt19937::from_state(state, mt::N);
    Ok(RecoveryResult {
        candidates: vec![Recovered::State(GeneratorState::Mt19937(clone))],
        trials_examined: mt::N as u64,
        verification_depth: mt::N,
    })
}

// ---------------------------------------------------------------------------
// LCG parameter recovery
// ---------------------------------------------------------------------------

/// Recovers `(a, c)` of `S' = (aS + c) mod m` from consecutive raw states.
///
/// With `d = s2 - s1` invertible mod `m` the parameters are unique:
/// `a = (s3 - s2)·d^(-1)`, `c = s2 - a·s1`. When `gcd(d, m) = g > 1` the
/// multiplier is only determined modulo `m/g`; all `g` coset candidates are
/// enumerated (bounded by `cap`), each verified against *every* supplied
/// output, and the survivors returned in ascending `a` order. A candidate
/// count above `cap` is reported as an ambiguity carrying the gcd.
pub fn lcg_recover_params(
    outputs: &[u64],
    m: u64,
    cap: u64,
) -> Result<RecoveryResult, RecoveryError> {
    if outputs.len() < 3 {
        return Err(RecoveryError::TooFewOutputs {
            need: 3,
            got: outputs.len(),
        });
    }
    if m < 2 {
        return Err(PrngError::ModulusTooSmall(m).into());
    }
    if let Some(&bad) = outputs.iter().find(|&&v| v >= m) {
        return Err(RecoveryError::OutputOutOfRange {
            value: bad,
            modulus: m,
        });
    }
    let (s1, s2, s3) = (outputs[0], outputs[1], outputs[2]);
    let d = sub_mod(s2, s1, m);
    let e = sub_mod(s3, s2, m);
    let g = gcd(d, m);

    let (first_a, step, count) = if g == 1 {
        let inv = mod_inverse(d, m).expect("gcd checked to be 1");
        (mul_mod(e, inv, m), m, 1)
    } else {
        if e % g != 0 {
            // a·d can only reach multiples of gcd(d, m).
            return Err(RecoveryError::NotThisGenerator);
        }
        if g > cap {
            return Err(RecoveryError::Ambiguous {
                gcd: g,
                candidates: g,
                cap,
            });
        }
        let m_red = m / g;
        let a0 = if m_red == 1 {
            // d ≡ 0: every multiplier satisfies the congruence.
            0
        } else {
            let inv = mod_inverse(d / g % m_red, m_red).expect("d/g is invertible mod m/g");
            mul_mod(e / g % m_red, inv, m_red)
        };
        (a0, m_red, g)
    };

    let mut candidates = Vec::new();
    let mut trials = 0u64;
    for t in 0..count {
        trials += 1;
        let a = (first_a + t * step) % m;
        let c = sub_mod(s2, mul_mod(a, s1, m), m);
        let fits = outputs
            .windows(2)
            .all(|w| (mul_mod(a, w[0], m) + c) % m == w[1]);
        if fits {
            candidates.push(Recovered::LcgParams { a, c });
        }
    }
    if candidates.is_empty() {
        return Err(RecoveryError::NotThisGenerator);
    }
    Ok(RecoveryResult {
        candidates,
        trials_examined: trials,
        verification_depth: outputs.len(),
    })
}

fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    (a % m + m - b % m) % m
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((u128::from(a) * u128::from(b)) % u128::from(m)) as u64
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Multiplicative inverse of `a` modulo `m` (extended Euclid), if coprime.
fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    if m == 1 {
        return Some(0);
    }
    let (mut old_r, mut r) = (i128::from(a % m), i128::from(m));
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return None;
    }
    Some(old_s.rem_euclid(i128::from(m)) as u64)
}

// ---------------------------------------------------------------------------
// Java 48-bit state recovery
// ---------------------------------------------------------------------------

/// Recovers the Java LCG's 48-bit state from two consecutive truncated
/// outputs by trying all 2^16 hidden low bits of the first state.
///
/// Every match is returned (callers disambiguate with a third output); the
/// returned generators are rewound one step so replaying them reproduces
/// `o1, o2, ...` before predicting further outputs.
pub fn java_state_recover(o1: u32, o2: u32) -> Result<RecoveryResult, RecoveryError> {
    use crate::prng::{JAVA_A, JAVA_C, JAVA_M};
    let mask = JAVA_M - 1;
    // Precomputed a^(-1) mod 2^48 for the rewind step.
    let a_inv = mod_inverse(JAVA_A, JAVA_M).expect("odd multiplier is invertible");
    let mut candidates = Vec::new();
    for low in 0..=0xFFFFu64 {
        let s1 = (u64::from(o1) << 16) | low;
        let s2 = (JAVA_A.wrapping_mul(s1).wrapping_add(JAVA_C)) & mask;
        if (s2 >> 16) as u32 == o2 {
            let s0 = mul_mod(sub_mod(s1, JAVA_C, JAVA_M), a_inv, JAVA_M);
            candidates.push(Recovered::State(GeneratorState::Lcg {
                params: LcgParams {
                    a: JAVA_A,
                    c: JAVA_C,
                    m: JAVA_M,
                    transform: crate::prng::OutputTransform::High32Of48,
                },
                state: s0,
            }));
        }
    }
    if candidates.is_empty() {
        return Err(RecoveryError::NotThisGenerator);
    }
    Ok(RecoveryResult {
        candidates,
        trials_examined: 0x1_0000,
        verification_depth: 2,
    })
}

// ---------------------------------------------------------------------------
// Seed searches
// ---------------------------------------------------------------------------

/// Finds every seed in `space` whose OTP stream begins with the observed
/// codes. At least 4 codes are required to keep accidental matches rare.
///
/// The search runs in parallel but the result is deterministic: candidates
/// are returned in ascending seed order regardless of worker count. An
/// empty result is a definitive negative over the space.
pub fn seed_bruteforce(
    template: &PrngSpec,
    observed: &[String],
    space: Range<u64>,
) -> Result<RecoveryResult, RecoveryError> {
    if observed.len() < 4 {
        return Err(RecoveryError::TooFewOutputs {
            need: 4,
            got: observed.len(),
        });
    }
    if matches!(template.algorithm, crate::prng::Algorithm::OsCsprng) {
        return Err(RecoveryError::UnsupportedTemplate(template.label()));
    }
    let len = template.otp_length;
    let modulus = crate::prng::otp_modulus(len)?;
    let mut targets = Vec::with_capacity(observed.len());
    for code in observed {
        if code.len() != len as usize || !code.bytes().all(|b| b.is_ascii_digit()) {
            return Err(RecoveryError::BadObservation(code.clone(), len));
        }
        targets.push(code.parse::<u64>().expect("digits checked"));
    }

    let trials = space.end.saturating_sub(space.start);
    let mut seeds: Vec<u64> = space
        .into_par_iter()
        .filter(|&seed| {
            // Seeds the algorithm cannot take (width) simply don't match.
            let Ok(mut gen) = template.with_seed(seed).make_generator() else {
                return false;
            };
            targets
                .iter()
                .all(|&want| u64::from(gen.next_raw()) % modulus == want)
        })
        .collect();
    seeds.sort_unstable();
    Ok(RecoveryResult {
        candidates: seeds.into_iter().map(Recovered::Seed).collect(),
        trials_examined: trials,
        verification_depth: observed.len(),
    })
}

/// Tests whether per-request timestamp seeding explains the observations.
///
/// Model: the server reseeds on every request with `seed = t + offset` for
/// one fixed clock offset within `±window` seconds of the recorded request
/// time `t`, and the observed code is the first draw after reseeding. A
/// match is reported when some offset explains at least `min_run`
/// *consecutive* observations. All qualifying offsets are returned, best
/// run first; an empty candidate list is a definitive negative.
pub fn timestamp_seed_match(
    template: &PrngSpec,
    observations: &[(u64, String)],
    window: i64,
    min_run: usize,
) -> Result<RecoveryResult, RecoveryError> {
    if observations.is_empty() {
        return Err(RecoveryError::TooFewOutputs { need: 1, got: 0 });
    }
    if matches!(template.algorithm, crate::prng::Algorithm::OsCsprng) {
        return Err(RecoveryError::UnsupportedTemplate(template.label()));
    }
    let len = template.otp_length;
    let min_run = min_run.max(1);
    let mut qualifying = Vec::new();
    let mut trials = 0u64;
    for offset in -window..=window {
        let mut best: Option<(usize, usize)> = None; // (run_len, run_start)
        let mut run_start = 0usize;
        let mut run_len = 0usize;
        for (i, (t, code)) in observations.iter().enumerate() {
            trials += 1;
            let matched = t
                .checked_add_signed(offset)
                .and_then(|seed| {
                    let mut gen = template.with_seed(seed).make_generator().ok()?;
                    gen.draw_otp(len).ok()
                })
                .is_some_and(|drawn| drawn == *code);
            if matched {
                if run_len == 0 {
                    run_start = i;
                }
                run_len += 1;
                if best.is_none_or(|(len, _)| run_len > len) {
                    best = Some((run_len, run_start));
                }
            } else {
                run_len = 0;
            }
        }
        if let Some((run_len, run_start)) = best {
            if run_len >= min_run {
                qualifying.push(Recovered::ClockOffset {
                    offset,
                    run_start,
                    run_len,
                });
            }
        }
    }
    // Longest run first; ties broken by offset magnitude, then sign.
    qualifying.sort_by_key(|c| match c {
        Recovered::ClockOffset {
            offset, run_len, ..
        } => (std::cmp::Reverse(*run_len), offset.unsigned_abs(), *offset),
        _ => unreachable!("only clock offsets are collected"),
    });
    let depth = qualifying
        .first()
        .map(|c| match c {
            Recovered::ClockOffset { run_len, .. } => *run_len,
            _ => 0,
        })
        .unwrap_or(0);
    Ok(RecoveryResult {
        candidates: qualifying,
        trials_examined: trials,
        verification_depth: depth,
    })
}
