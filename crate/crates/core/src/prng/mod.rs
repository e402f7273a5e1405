//! Reference implementations of the PRNG families weak OTP servers use.
//!
//! Every generator produces a stream of unsigned 32-bit raw values via
//! [`GeneratorState::next_raw`]; OTP codes are drawn from raw values as
//! `raw mod 10^L`, zero-padded to exactly `L` decimal digits
//! ([`GeneratorState::draw_otp`]).
//!
//! Supported algorithms:
//!
//! - [`Algorithm::Lcg`] — linear congruential `S' = (a·S + c) mod m` with a
//!   configurable output transform; presets cover the portable C `rand`
//!   (= PHP `rand`), the Java 48-bit generator, and plain `m = 2^31` LCGs.
//! - [`Algorithm::Lfib`] — lagged Fibonacci with two or three lags and a
//!   configurable combiner (add / sub / mul / xor) modulo `m`.
//! - [`Algorithm::Mt19937`] — the standard 624-word Mersenne Twister.
//! - [`Algorithm::Well512`] — the published 16-word WELL512a transform.
//! - [`Algorithm::DualLcg`] — the PHP `lcg_value()` combined generator
//!   (two LCGs whose difference is scaled to a 31-bit integer).
//! - [`Algorithm::OsCsprng`] — operating-system entropy; the one
//!   intentionally non-deterministic member, used as the secure baseline.

pub(crate) mod mt19937;
mod well512;

pub use mt19937::Mt19937;
pub use well512::Well512;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors raised while validating a [`PrngSpec`] or building a generator.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum PrngError {
    #[error("modulus must be at least 2, got {0}")]
    ModulusTooSmall(u64),
    #[error("parameter {name} = {value} must be less than the modulus {modulus}")]
    ParamOutOfRange {
        name: &'static str,
        value: u64,
        modulus: u64,
    },
    #[error("modulus {0} too large for a 32-bit output stream (max 2^32)")]
    ModulusTooWide(u64),
    #[error("lagged Fibonacci needs 2 or 3 strictly increasing positive lags, got {0:?}")]
    BadLags(Vec<u32>),
    #[error("initial sequence length {got} must equal the largest lag {want}")]
    BadInitLen { got: usize, want: usize },
    #[error("initial sequence value {0} must be less than the modulus {1}")]
    BadInitValue(u64, u64),
    #[error("seed {seed} does not fit the {width}-bit state of this algorithm")]
    SeedTooWide { seed: u64, width: u32 },
    #[error("algorithm requires an explicit seed")]
    MissingSeed,
    #[error("OTP length {0} out of range (4..=8)")]
    BadOtpLength(u8),
}

/// Number of decimal digits in a drawn OTP code. Valid range is 4..=8.
pub type OtpLength = u8;

/// Validates an OTP length and returns the modulus `10^L`.
pub fn otp_modulus(len: OtpLength) -> Result<u64, PrngError> {
    if !(4..=8).contains(&len) {
        return Err(PrngError::BadOtpLength(len));
    }
    Ok(10u64.pow(u32::from(len)))
}

/// How an LCG state is mapped to the 32-bit raw output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputTransform {
    /// Raw output is the state itself (requires `m <= 2^32`).
    Identity,
    /// `(state / 65536) mod 32768` — the portable C `rand` output window.
    Top16Mod32768,
    /// Top 32 bits of a 48-bit state (`state >> 16`) — the Java generator.
    High32Of48,
}

/// Parameters of a linear congruential generator `S' = (a·S + c) mod m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LcgParams {
    pub a: u64,
    pub c: u64,
    pub m: u64,
    pub transform: OutputTransform,
}

impl LcgParams {
    /// Plain LCG with identity output, the form used in parameter recovery.
    pub fn plain(a: u64, c: u64, m: u64) -> Self {
        LcgParams {
            a,
            c,
            m,
            transform: OutputTransform::Identity,
        }
    }

    pub(crate) fn validate(&self) -> Result<(), PrngError> {
        if self.m < 2 {
            return Err(PrngError::ModulusTooSmall(self.m));
        }
        for (name, value) in [("a", self.a), ("c", self.c)] {
            if value >= self.m {
                return Err(PrngError::ParamOutOfRange {
                    name,
                    value,
                    modulus: self.m,
                });
            }
        }
        let max_m = match self.transform {
            // Identity emits the state itself, so it must fit in 32 bits.
            OutputTransform::Identity => 1u64 << 32,
            // The C-rand window only ever emits values below 32768.
            OutputTransform::Top16Mod32768 => 1u64 << 32,
            // 48-bit state, top 32 bits emitted.
            OutputTransform::High32Of48 => 1u64 << 48,
        };
        if self.m > max_m {
            return Err(PrngError::ModulusTooWide(self.m));
        }
        Ok(())
    }
}

/// Combiner applied between lagged values of a lagged Fibonacci generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LfibOp {
    Add,
    Sub,
    Mul,
    Xor,
}

/// Parameters of a lagged Fibonacci generator
/// `S_k = S_{k-l1} op S_{k-l2} (op S_{k-l3}) mod m`.
///
/// `lags` holds 2 or 3 strictly increasing positive lags; `init` seeds the
/// first `max(lags)` values of the sequence. With `op = Sub` the fold is
/// left-to-right: `(S_{k-l1} - S_{k-l2}) - S_{k-l3}`, reduced into `[0, m)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LfibParams {
    pub lags: Vec<u32>,
    pub op: LfibOp,
    pub m: u64,
    pub init: Vec<u64>,
}

impl LfibParams {
    pub(crate) fn validate(&self) -> Result<(), PrngError> {
        if self.m < 2 {
            return Err(PrngError::ModulusTooSmall(self.m));
        }
        if self.m > 1u64 << 32 {
            return Err(PrngError::ModulusTooWide(self.m));
        }
        let ok_count = self.lags.len() == 2 || self.lags.len() == 3;
        let strictly_increasing = self.lags.windows(2).all(|w| w[0] < w[1]);
        if !ok_count || !strictly_increasing || self.lags[0] == 0 {
            return Err(PrngError::BadLags(self.lags.clone()));
        }
        let max_lag = *self.lags.last().expect("lags checked non-empty") as usize;
        if self.init.len() != max_lag {
            return Err(PrngError::BadInitLen {
                got: self.init.len(),
                want: max_lag,
            });
        }
        if let Some(&bad) = self.init.iter().find(|&&v| v >= self.m) {
            return Err(PrngError::BadInitValue(bad, self.m));
        }
        Ok(())
    }
}

/// Algorithm tag plus algorithm-specific parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Algorithm {
    Lcg(LcgParams),
    Lfib(LfibParams),
    Mt19937,
    Well512,
    /// PHP `lcg_value()`: two combined LCGs seeded by `(seed, seed2)`.
    DualLcg,
    /// Operating-system entropy. Never deterministic; seeds are ignored.
    OsCsprng,
}

/// Full description of a generator: algorithm, seed(s), and OTP length.
///
/// `seed2` is only meaningful for [`Algorithm::DualLcg`]. A missing seed
/// falls back to the algorithm's conventional default where one exists
/// (1 for the C/PHP preset, 5489 for MT19937 and WELL512); the Java preset
/// and the dual LCG require explicit seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrngSpec {
    pub algorithm: Algorithm,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed2: Option<u64>,
    pub otp_length: OtpLength,
}

/// Multiplier of the portable C `rand` recurrence.
pub const C_RAND_A: u64 = 1_103_515_245;
/// Increment of the portable C `rand` recurrence.
pub const C_RAND_C: u64 = 12_345;
/// Modulus of the portable C `rand` recurrence.
pub const C_RAND_M: u64 = 1 << 31;
/// Multiplier of the Java 48-bit recurrence.
pub const JAVA_A: u64 = 0x5DEECE66D;
/// Increment of the Java 48-bit recurrence.
pub const JAVA_C: u64 = 0xB;
/// Modulus of the Java 48-bit recurrence.
pub const JAVA_M: u64 = 1 << 48;

impl PrngSpec {
    /// Portable C `rand`: `a = 1103515245, c = 12345, m = 2^31`,
    /// output `(state / 65536) mod 32768`. Default seed 1.
    pub fn c_rand(seed: u64) -> Self {
        PrngSpec {
            algorithm: Algorithm::Lcg(LcgParams {
                a: C_RAND_A,
                c: C_RAND_C,
                m: C_RAND_M,
                transform: OutputTransform::Top16Mod32768,
            }),
            seed: Some(seed),
            seed2: None,
            otp_length: 6,
        }
    }

    /// PHP `rand()` on platforms where it forwards to the C library —
    /// identical to [`PrngSpec::c_rand`].
    pub fn php_rand(seed: u64) -> Self {
        Self::c_rand(seed)
    }

    /// Java's 48-bit generator: `a = 0x5DEECE66D, c = 0xB, m = 2^48`,
    /// initial state `(seed XOR a) mod 2^48`, output `state >> 16`.
    pub fn java_lcg(seed: u64) -> Self {
        PrngSpec {
            algorithm: Algorithm::Lcg(LcgParams {
                a: JAVA_A,
                c: JAVA_C,
                m: JAVA_M,
                transform: OutputTransform::High32Of48,
            }),
            seed: Some(seed),
            seed2: None,
            otp_length: 6,
        }
    }

    /// PHP `lcg_value()`: combined dual LCG seeded with two 31-bit seeds.
    pub fn lcg_value(seed: u64, seed2: u64) -> Self {
        PrngSpec {
            algorithm: Algorithm::DualLcg,
            seed: Some(seed),
            seed2: Some(seed2),
            otp_length: 6,
        }
    }

    /// Standard MT19937 with the Knuth-multiplier state fill.
    pub fn mt19937(seed: u64) -> Self {
        PrngSpec {
            algorithm: Algorithm::Mt19937,
            seed: Some(seed),
            seed2: None,
            otp_length: 6,
        }
    }

    /// WELL512 with the published transform and the same Knuth-multiplier
    /// 16-word state fill used for MT19937 seeding.
    pub fn well512(seed: u64) -> Self {
        PrngSpec {
            algorithm: Algorithm::Well512,
            seed: Some(seed),
            seed2: None,
            otp_length: 6,
        }
    }

    /// Operating-system entropy (the secure baseline).
    pub fn os_csprng() -> Self {
        PrngSpec {
            algorithm: Algorithm::OsCsprng,
            seed: None,
            seed2: None,
            otp_length: 6,
        }
    }

    /// Returns a copy with a different seed (seed2 untouched).
    pub fn with_seed(&self, seed: u64) -> Self {
        let mut spec = self.clone();
        spec.seed = Some(seed);
        spec
    }

    /// Returns a copy with a different OTP length.
    pub fn with_otp_length(&self, len: OtpLength) -> Result<Self, PrngError> {
        otp_modulus(len)?;
        let mut spec = self.clone();
        spec.otp_length = len;
        Ok(spec)
    }

    /// A short stable label for reports ("c_rand", "mt19937", ...).
    pub fn label(&self) -> String {
        match &self.algorithm {
            Algorithm::Lcg(p) => match (p.a, p.c, p.m, p.transform) {
                (C_RAND_A, C_RAND_C, C_RAND_M, OutputTransform::Top16Mod32768) => {
                    "c_rand".to_string()
                }
                (JAVA_A, JAVA_C, JAVA_M, OutputTransform::High32Of48) => "java_lcg".to_string(),
                _ => format!("lcg(a={},c={},m={})", p.a, p.c, p.m),
            },
            Algorithm::Lfib(p) => format!("lfib(lags={:?},m={})", p.lags, p.m),
            Algorithm::Mt19937 => "mt19937".to_string(),
            Algorithm::Well512 => "well512".to_string(),
            Algorithm::DualLcg => "lcg_value".to_string(),
            Algorithm::OsCsprng => "os_csprng".to_string(),
        }
    }

    /// Builds the runnable generator, validating all parameters.
    pub fn make_generator(&self) -> Result<GeneratorState, PrngError> {
        otp_modulus(self.otp_length)?;
        match &self.algorithm {
            Algorithm::Lcg(params) => {
                params.validate()?;
                let default = if *params
                    == (LcgParams {
                        a: C_RAND_A,
                        c: C_RAND_C,
                        m: C_RAND_M,
                        transform: OutputTransform::Top16Mod32768,
                    }) {
                    Some(1)
                } else {
                    None
                };
                let seed = self.seed.or(default).ok_or(PrngError::MissingSeed)?;
                let state = match params.transform {
                    // Java scrambles the seed into the 48-bit state.
                    OutputTransform::High32Of48 => {
                        if seed >= 1u64 << 48 {
                            return Err(PrngError::SeedTooWide { seed, width: 48 });
                        }
                        (seed ^ JAVA_A) % params.m
                    }
                    _ => {
                        if seed >= params.m {
                            return Err(PrngError::SeedTooWide {
                                seed,
                                width: 64 - params.m.leading_zeros(),
                            });
                        }
                        seed
                    }
                };
                Ok(GeneratorState::Lcg {
                    params: *params,
                    state,
                })
            }
            Algorithm::Lfib(params) => {
                params.validate()?;
                Ok(GeneratorState::Lfib {
                    params: params.clone(),
                    buf: params.init.clone(),
                    pos: 0,
                })
            }
            Algorithm::Mt19937 => {
                let seed = self.seed.unwrap_or(5489);
                let seed32 =
                    u32::try_from(seed).map_err(|_| PrngError::SeedTooWide { seed, width: 32 })?;
                Ok(GeneratorState::Mt19937(Mt19937::from_seed(seed32)))
            }
            Algorithm::Well512 => {
                let seed = self.seed.unwrap_or(5489);
                let seed32 =
                    u32::try_from(seed).map_err(|_| PrngError::SeedTooWide { seed, width: 32 })?;
                Ok(GeneratorState::Well512(Well512::from_seed(seed32)))
            }
            Algorithm::DualLcg => {
                let s1 = self.seed.ok_or(PrngError::MissingSeed)?;
                let s2 = self.seed2.ok_or(PrngError::MissingSeed)?;
                for seed in [s1, s2] {
                    if seed >= 1u64 << 31 {
                        return Err(PrngError::SeedTooWide { seed, width: 31 });
                    }
                }
                Ok(GeneratorState::DualLcg {
                    s1: s1 as i64,
                    s2: s2 as i64,
                })
            }
            Algorithm::OsCsprng => Ok(GeneratorState::OsCsprng),
        }
    }

    /// First `n` raw outputs of a fresh generator.
    pub fn stream(&self, n: usize) -> Result<Vec<u32>, PrngError> {
        let mut g = self.make_generator()?;
        Ok((0..n).map(|_| g.next_raw()).collect())
    }

    /// First `n` OTP codes of a fresh generator at this spec's OTP length.
    pub fn otp_stream(&self, n: usize) -> Result<Vec<String>, PrngError> {
        let mut g = self.make_generator()?;
        let len = self.otp_length;
        (0..n).map(|_| g.draw_otp(len)).collect()
    }
}

/// Modulus of the first PHP combined-LCG half.
const DUAL_M1: i64 = 2_147_483_563;
/// Modulus of the second PHP combined-LCG half.
const DUAL_M2: i64 = 2_147_483_399;

/// A runnable generator. Cloning snapshots the full state, so a clone
/// replays exactly the same future stream (except [`GeneratorState::OsCsprng`]).
#[derive(Debug, Clone)]
pub enum GeneratorState {
    Lcg {
        params: LcgParams,
        state: u64,
    },
    Lfib {
        params: LfibParams,
        /// Ring buffer holding the last `max(lags)` values; `pos` is the
        /// slot the next value will overwrite (the oldest entry).
        buf: Vec<u64>,
        pos: usize,
    },
    Mt19937(Mt19937),
    Well512(Well512),
    DualLcg {
        s1: i64,
        s2: i64,
    },
    OsCsprng,
}

impl GeneratorState {
    /// Advances the state one step and returns the raw 32-bit output.
    pub fn next_raw(&mut self) -> u32 {
        match self {
            GeneratorState::Lcg { params, state } => {
                // Up to 48-bit operands: do the multiply in 128 bits.
                let next =
                    ((u128::from(params.a) * u128::from(*state) + u128::from(params.c))
                        % u128::from(params.m)) as u64;
                *state = next;
                match params.transform {
                    OutputTransform::Identity => next as u32,
                    OutputTransform::Top16Mod32768 => ((next >> 16) % 32768) as u32,
                    OutputTransform::High32Of48 => (next >> 16) as u32,
                }
            }
            GeneratorState::Lfib { params, buf, pos } => {
                let p = buf.len();
                let m = params.m;
                let lagged = |lag: u32| buf[(*pos + p - lag as usize) % p];
                let mut acc = lagged(params.lags[0]);
                for &lag in &params.lags[1..] {
                    let rhs = lagged(lag);
                    acc = match params.op {
                        LfibOp::Add => (acc + rhs) % m,
                        // Reduce into [0, m) even when rhs > acc.
                        LfibOp::Sub => (acc + m - rhs) % m,
                        LfibOp::Mul => ((u128::from(acc) * u128::from(rhs)) % u128::from(m)) as u64,
                        LfibOp::Xor => (acc ^ rhs) % m,
                    };
                }
                buf[*pos] = acc;
                *pos = (*pos + 1) % p;
                acc as u32
            }
            GeneratorState::Mt19937(mt) => mt.next_u32(),
            GeneratorState::Well512(well) => well.next_u32(),
            GeneratorState::DualLcg { s1, s2 } => {
                // PHP lcg_value(): two Schrage-form LCG steps, difference
                // folded into [1, 2147483562].
                *s1 = 40014 * (*s1 % 53668) - 12211 * (*s1 / 53668);
                if *s1 < 0 {
                    *s1 += DUAL_M1;
                }
                *s2 = 40692 * (*s2 % 52774) - 3791 * (*s2 / 52774);
                if *s2 < 0 {
                    *s2 += DUAL_M2;
                }
                let mut z = *s1 - *s2;
                if z < 1 {
                    z += DUAL_M1 - 1;
                }
                // Integer-exact "normalize to (0,1), scale to 31 bits":
                // floor(z * 2^31 / m1) without going through floats.
                ((u128::from(z as u64) << 31) / u128::from(DUAL_M1 as u64)) as u32
            }
            GeneratorState::OsCsprng => {
                let mut buf = [0u8; 4];
                getrandom::fill(&mut buf).expect("operating-system entropy unavailable");
                u32::from_le_bytes(buf)
            }
        }
    }

    /// Draws one OTP code: `next_raw() mod 10^L`, zero-padded to `L` digits.
    pub fn draw_otp(&mut self, len: OtpLength) -> Result<String, PrngError> {
        let modulus = otp_modulus(len)?;
        let value = u64::from(self.next_raw()) % modulus;
        Ok(format!("{value:0width$}", width = len as usize))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Frozen expected values; derived with independent implementations of
    // each recurrence and cross-checked against published sequences.
    const C_RAND_SEED1_FIRST20: [u32; 20] = [
        16838, 5758, 10113, 17515, 31051, 5627, 23010, 7419, 16212, 4086, 2749, 12767, 9084,
        12060, 32225, 17543, 25089, 21183, 25137, 25566,
    ];
    const MT_SEED5489_FIRST10: [u32; 10] = [
        3499211612, 581869302, 3890346734, 3586334585, 545404204, 4161255391, 3922919429,
        949333985, 2715962298, 1323567403,
    ];
    const JAVA_SEED42_FIRST5: [u32; 5] =
        [3124862261, 234785527, 2934422497, 205897768, 1325939940];
    const LCG_VALUE_1_2_FIRST5: [u32; 5] =
        [2147442276, 436925884, 1434534256, 990707825, 1573909368];
    const WELL512_SEED12345_FIRST6: [u32; 6] = [
        3072437747, 3304182464, 2955451663, 3096138484, 1011788893, 384808400,
    ];

    #[test]
    fn c_rand_matches_frozen_sequence() {
        assert_eq!(
            PrngSpec::c_rand(1).stream(20).unwrap(),
            C_RAND_SEED1_FIRST20
        );
    }

    #[test]
    fn c_rand_defaults_to_seed_1() {
        let mut spec = PrngSpec::c_rand(1);
        spec.seed = None;
        assert_eq!(spec.stream(1).unwrap(), [16838]);
    }

    #[test]
    fn php_rand_aliases_c_rand() {
        assert_eq!(
            PrngSpec::php_rand(7).stream(10).unwrap(),
            PrngSpec::c_rand(7).stream(10).unwrap()
        );
    }

    #[test]
    fn mt19937_matches_frozen_sequence() {
        assert_eq!(
            PrngSpec::mt19937(5489).stream(10).unwrap(),
            MT_SEED5489_FIRST10
        );
        // No-seed default is the canonical 5489 stream.
        let mut spec = PrngSpec::mt19937(0);
        spec.seed = None;
        assert_eq!(spec.stream(1).unwrap(), [3499211612]);
    }

    #[test]
    fn java_lcg_matches_frozen_sequence() {
        assert_eq!(
            PrngSpec::java_lcg(42).stream(5).unwrap(),
            JAVA_SEED42_FIRST5
        );
    }

    #[test]
    fn lcg_value_matches_frozen_sequence() {
        assert_eq!(
            PrngSpec::lcg_value(1, 2).stream(5).unwrap(),
            LCG_VALUE_1_2_FIRST5
        );
    }

    #[test]
    fn well512_matches_frozen_sequence() {
        assert_eq!(
            PrngSpec::well512(12345).stream(6).unwrap(),
            WELL512_SEED12345_FIRST6
        );
    }

    #[test]
    fn lfib_two_lag_add_produces_fibonacci_mod_10() {
        let spec = PrngSpec {
            algorithm: Algorithm::Lfib(LfibParams {
                lags: vec![1, 2],
                op: LfibOp::Add,
                m: 10,
                init: vec![1, 1],
            }),
            seed: None,
            seed2: None,
            otp_length: 4,
        };
        assert_eq!(spec.stream(6).unwrap(), [2, 3, 5, 8, 3, 1]);
    }

    #[test]
    fn lfib_all_even_init_with_even_modulus_stays_even() {
        // The classic parity trap: an all-even initial sequence under an
        // even modulus can never produce an odd value with add/sub/mul.
        for op in [LfibOp::Add, LfibOp::Sub, LfibOp::Mul] {
            let spec = PrngSpec {
                algorithm: Algorithm::Lfib(LfibParams {
                    lags: vec![3, 7],
                    op,
                    m: 1 << 16,
                    init: vec![2, 4, 6, 8, 10, 12, 14],
                }),
                seed: None,
                seed2: None,
                otp_length: 4,
            };
            assert!(spec.stream(100).unwrap().iter().all(|v| v % 2 == 0));
        }
    }

    #[test]
    fn lfib_three_lag_subtract_stays_in_range() {
        let spec = PrngSpec {
            algorithm: Algorithm::Lfib(LfibParams {
                lags: vec![2, 3, 5],
                op: LfibOp::Sub,
                m: 97,
                init: vec![10, 20, 30, 40, 50],
            }),
            seed: None,
            seed2: None,
            otp_length: 4,
        };
        assert!(spec.stream(500).unwrap().iter().all(|&v| u64::from(v) < 97));
    }

    #[test]
    fn full_period_lcg_visits_every_residue() {
        // a=5, c=3, m=16 satisfies the full-period conditions, so 16
        // consecutive states cover all residues exactly once.
        let spec = PrngSpec {
            algorithm: Algorithm::Lcg(LcgParams::plain(5, 3, 16)),
            seed: Some(1),
            seed2: None,
            otp_length: 4,
        };
        let outputs = spec.stream(16).unwrap();
        assert_eq!(outputs[..3], [8, 11, 10]);
        let mut seen: Vec<u32> = outputs.clone();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 16);
    }

    #[test]
    fn draw_otp_pads_to_exact_length() {
        // First raw value 16838 at L=6 must render with a leading zero.
        let mut g = PrngSpec::c_rand(1).make_generator().unwrap();
        assert_eq!(g.draw_otp(6).unwrap(), "016838");
    }

    #[test]
    fn otp_stream_equals_manual_draws() {
        let spec = PrngSpec::mt19937(99);
        let codes = spec.otp_stream(5).unwrap();
        let mut g = spec.make_generator().unwrap();
        for code in codes {
            assert_eq!(code, g.draw_otp(6).unwrap());
        }
    }

    #[test]
    fn cloned_generator_replays_identically() {
        let mut g = PrngSpec::well512(777).make_generator().unwrap();
        for _ in 0..37 {
            g.next_raw();
        }
        let mut h = g.clone();
        let a: Vec<u32> = (0..50).map(|_| g.next_raw()).collect();
        let b: Vec<u32> = (0..50).map(|_| h.next_raw()).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn os_csprng_ignores_seeds_and_produces_values() {
        let mut g = PrngSpec::os_csprng().make_generator().unwrap();
        let vals: Vec<u32> = (0..8).map(|_| g.next_raw()).collect();
        // Not a randomness test; just check the plumbing returns data and
        // isn't stuck on a constant.
        assert!(vals.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn validation_rejects_bad_parameters() {
        let bad_modulus = PrngSpec {
            algorithm: Algorithm::Lcg(LcgParams::plain(1, 0, 1)),
            seed: Some(0),
            seed2: None,
            otp_length: 6,
        };
        assert_eq!(
            bad_modulus.make_generator().unwrap_err(),
            PrngError::ModulusTooSmall(1)
        );

        let a_out_of_range = PrngSpec {
            algorithm: Algorithm::Lcg(LcgParams::plain(16, 3, 16)),
            seed: Some(1),
            seed2: None,
            otp_length: 6,
        };
        assert!(matches!(
            a_out_of_range.make_generator().unwrap_err(),
            PrngError::ParamOutOfRange { name: "a", .. }
        ));

        let bad_lags = PrngSpec {
            algorithm: Algorithm::Lfib(LfibParams {
                lags: vec![5, 2],
                op: LfibOp::Add,
                m: 10,
                init: vec![1, 1, 1, 1, 1],
            }),
            seed: None,
            seed2: None,
            otp_length: 6,
        };
        assert!(matches!(
            bad_lags.make_generator().unwrap_err(),
            PrngError::BadLags(_)
        ));

        let bad_init = PrngSpec {
            algorithm: Algorithm::Lfib(LfibParams {
                lags: vec![1, 2],
                op: LfibOp::Add,
                m: 10,
                init: vec![1],
            }),
            seed: None,
            seed2: None,
            otp_length: 6,
        };
        assert!(matches!(
            bad_init.make_generator().unwrap_err(),
            PrngError::BadInitLen { got: 1, want: 2 }
        ));

        let wide_seed = PrngSpec::mt19937(1 << 33);
        assert!(matches!(
            wide_seed.make_generator().unwrap_err(),
            PrngError::SeedTooWide { width: 32, .. }
        ));

        let missing_seed = PrngSpec {
            algorithm: Algorithm::DualLcg,
            seed: Some(1),
            seed2: None,
            otp_length: 6,
        };
        assert_eq!(
            missing_seed.make_generator().unwrap_err(),
            PrngError::MissingSeed
        );

        assert_eq!(otp_modulus(3).unwrap_err(), PrngError::BadOtpLength(3));
        assert_eq!(otp_modulus(9).unwrap_err(), PrngError::BadOtpLength(9));
    }
}
