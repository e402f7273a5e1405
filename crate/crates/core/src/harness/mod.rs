//! Simulated vulnerable OTP server fleet.
//!
//! A [`Harness`] owns a set of phone-verification accounts, a simulated
//! clock, and one weakness profile deciding how verification codes are
//! produced. Everything is deterministic: the codes any account receives
//! are a pure function of the server config and the request/clock history,
//! so the same trace replays to byte-identical SMS bodies. The single
//! exception is the [`ProfileKind::Secure`] profile, which draws from the
//! operating-system CSPRNG and serves as the soundness control.
//!
//! Time never flows on its own. The simulated clock only moves through
//! explicit [`Harness::advance_clock`] calls, which makes renewal-policy
//! behaviour reproducible down to the second.
//!
//! The [`http`] submodule serves a harness over a small HTTP/1.1 JSON API.

pub mod http;
#[cfg(test)]
mod tests;

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::{Arc, Mutex, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, KvMap, SPEC_KEYS};
use crate::prng::{otp_modulus, Algorithm, GeneratorState, OtpLength, PrngError, PrngSpec};
use crate::rules::{ParityPattern, RotationDirection};

/// SMS body used when the config does not override `template`.
pub const DEFAULT_SMS_TEMPLATE: &str = "Your verification code is {code}. Valid for 5 minutes.";

/// Requests allowed per account per simulated day unless overridden.
pub const DEFAULT_DAILY_QUOTA: u32 = 20;

/// Simulated epoch the clock starts at unless overridden: fits both a
/// 31-bit C `rand` seed and a 32-bit MT/WELL seed, so timestamp-seeded
/// profiles can feed the clock straight into any preset.
pub const DEFAULT_CLOCK_START: u64 = 1_600_000_000;

const SECONDS_PER_DAY: u64 = 86_400;

/// Errors returned by harness operations.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown account {0:?}")]
    UnknownAccount(String),
    #[error("account {0:?} is already registered")]
    AccountExists(String),
    #[error("account id must be non-empty")]
    EmptyAccountId,
    #[error("daily quota exhausted")]
    QuotaExceeded,
    #[error("clock delta must be non-negative, got {0}")]
    NegativeClockDelta(i64),
    #[error("clock overflow")]
    ClockOverflow,
    #[error("SMS template must contain the {{code}} placeholder exactly once")]
    BadTemplate,
    #[error("invalid profile config: {0}")]
    BadProfile(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Prng(#[from] PrngError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot: {0}")]
    Snapshot(String),
}

/// Which code-generation weakness the simulated server exhibits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileKind {
    /// Every account keeps one fixed code forever.
    StaticPerAccount,
    /// All accounts walk a shared table of `size` codes, each from its own
    /// position; the table itself comes from `table`.
    FixedTable { size: usize, table: PrngSpec },
    /// Each freshly drawn code is served for `n` consecutive renewals.
    RepeatN { n: usize },
    /// The code's low `width` bits rotate one position per renewal.
    Rotation {
        width: u32,
        direction: RotationDirection,
    },
    /// Each renewal appends one random bit: `v' = 2v + b mod 10^L`.
    AppendBit,
    /// Each renewal inserts one random bit at `position` (counted from the
    /// most significant bit), restarting from a short value before the
    /// code would outgrow its digit budget.
    InsertBit { position: u32 },
    /// Codes are otherwise random but the lowest bit follows `pattern`.
    Parity { pattern: ParityPattern },
    /// One constant-seeded generator stream; every account sees the same
    /// sequence from position zero.
    ConstSeed { spec: PrngSpec },
    /// The generator is reseeded from the simulated clock (plus the
    /// configured skew) at every renewal.
    TimestampSeed { spec: PrngSpec },
    /// Codes come from the operating-system CSPRNG.
    Secure,
}

impl ProfileKind {
    /// Stable identifier, as used by the `profile` config key.
    pub fn label(&self) -> &'static str {
        match self {
            ProfileKind::StaticPerAccount => "static_per_account",
            ProfileKind::FixedTable { .. } => "fixed_table",
            ProfileKind::RepeatN { .. } => "repeat_n",
            ProfileKind::Rotation { .. } => "rotation",
            ProfileKind::AppendBit => "append_bit",
            ProfileKind::InsertBit { .. } => "insert_bit",
            ProfileKind::Parity { .. } => "parity",
            ProfileKind::ConstSeed { .. } => "const_seed",
            ProfileKind::TimestampSeed { .. } => "timestamp_seed",
            ProfileKind::Secure => "secure",
        }
    }
}

/// When an account's current code is replaced by a fresh one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum RenewalPolicy {
    /// Every request issues a fresh code.
    PerRequest,
    /// The current code is served until it is successfully consumed.
    OnConsume,
    /// A fresh code is issued once the current one is `seconds` old.
    AfterDuration { seconds: u64 },
}

impl std::fmt::Display for RenewalPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RenewalPolicy::PerRequest => write!(f, "per_request"),
            RenewalPolicy::OnConsume => write!(f, "on_consume"),
            RenewalPolicy::AfterDuration { seconds } => write!(f, "after_duration({seconds} s)"),
        }
    }
}

/// Full description of one simulated server.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub profile: ProfileKind,
    /// Decimal digits per code (4..=8).
    pub otp_length: OtpLength,
    pub renewal: RenewalPolicy,
    /// Requests allowed per account per simulated day; `None` disables the
    /// quota entirely.
    pub daily_quota: Option<u32>,
    /// SMS body with exactly one `{code}` placeholder.
    pub template: String,
    /// Seed behind every derived per-account stream.
    pub base_seed: u64,
    /// Simulated epoch second the clock starts at.
    pub clock_start: u64,
    /// Offset added to the clock when a timestamp profile reseeds.
    pub clock_skew: i64,
}

impl HarnessConfig {
    /// A config with the given profile and every other field defaulted.
    pub fn new(profile: ProfileKind) -> Self {
        HarnessConfig {
            profile,
            otp_length: 6,
            renewal: RenewalPolicy::PerRequest,
            daily_quota: Some(DEFAULT_DAILY_QUOTA),
            template: DEFAULT_SMS_TEMPLATE.to_string(),
            base_seed: 1,
            clock_start: DEFAULT_CLOCK_START,
            clock_skew: 0,
        }
    }

    /// Checks every cross-field constraint.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let modulus = otp_modulus(self.otp_length)?;
        validate_template(&self.template)?;
        if let RenewalPolicy::AfterDuration { seconds } = self.renewal {
            if seconds == 0 {
                return Err(HarnessError::BadProfile(
                    "after_duration renewal needs a positive duration".to_string(),
                ));
            }
        }
        if self.daily_quota == Some(0) {
            return Err(HarnessError::BadProfile(
                "daily quota must be positive (or disabled)".to_string(),
            ));
        }
        match &self.profile {
            ProfileKind::StaticPerAccount | ProfileKind::AppendBit | ProfileKind::Secure => {}
            ProfileKind::FixedTable { size, table } => {
                if *size == 0 {
                    return Err(HarnessError::BadProfile(
                        "fixed_table needs at least one entry".to_string(),
                    ));
                }
                table.make_generator()?;
            }
            ProfileKind::RepeatN { n } => {
                if *n < 2 {
                    return Err(HarnessError::BadProfile(
                        "repeat_n needs n >= 2".to_string(),
                    ));
                }
            }
            ProfileKind::Rotation { width, .. } => {
                if *width < 2 {
                    return Err(HarnessError::BadProfile(
                        "rotation needs a width of at least 2 bits".to_string(),
                    ));
                }
                if *width >= 64 || (1u64 << *width) > modulus {
                    return Err(HarnessError::BadProfile(format!(
                        "rotation width {width} does not fit {} decimal digits",
                        self.otp_length
                    )));
                }
            }
            ProfileKind::InsertBit { position } => {
                if *position > INSERT_INITIAL_BITS {
                    return Err(HarnessError::BadProfile(format!(
                        "insert position {position} exceeds the {INSERT_INITIAL_BITS}-bit \
                         starting value"
                    )));
                }
            }
            ProfileKind::Parity { .. } => {}
            ProfileKind::ConstSeed { spec } => {
                if spec.algorithm == Algorithm::OsCsprng {
                    return Err(HarnessError::BadProfile(
                        "const_seed cannot use the OS CSPRNG".to_string(),
                    ));
                }
                spec.make_generator()?;
            }
            ProfileKind::TimestampSeed { spec } => {
                if spec.algorithm == Algorithm::OsCsprng {
                    return Err(HarnessError::BadProfile(
                        "timestamp_seed cannot use the OS CSPRNG".to_string(),
                    ));
                }
                // The seed is supplied by the clock at issue time; check the
                // starting point is usable so misconfigs fail fast.
                let seed = clock_seed(self.clock_start, self.clock_skew);
                spec.with_seed(seed).make_generator()?;
            }
        }
        Ok(())
    }
}

/// Simulated wall clock. Starts at a configured epoch second and moves
/// only through explicit non-negative advances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimClock {
    now: u64,
}

impl SimClock {
    pub fn new(start: u64) -> Self {
        SimClock { now: start }
    }

    /// Current simulated epoch second.
    pub fn now(&self) -> u64 {
        self.now
    }

    /// Simulated day ordinal; quota resets when this changes.
    pub fn day(&self) -> u64 {
        self.now / SECONDS_PER_DAY
    }

    /// Moves time forward by `delta` seconds. Rejects negative deltas —
    /// simulated time is monotone. Advancing by zero is a no-op.
    pub fn advance(&mut self, delta: i64) -> Result<u64, HarnessError> {
        if delta < 0 {
            return Err(HarnessError::NegativeClockDelta(delta));
        }
        self.now = self
            .now
            .checked_add(delta as u64)
            .ok_or(HarnessError::ClockOverflow)?;
        Ok(self.now)
    }
}

/// Starting value width for the insert-bit profile: 6 bits leaves room to
/// grow inside even the smallest (4-digit) code space.
const INSERT_INITIAL_BITS: u32 = 6;

/// Per-account generator position. Only replay counters and current values
/// are stored — never raw generator internals — so any deserialized state
/// is reachable by construction and snapshots stay format-stable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum ProfileState {
    Static,
    /// Next index into the shared table.
    FixedTable { position: u64 },
    /// `draws` raw outputs consumed from the account stream; `current` is
    /// the latest fresh value, re-served until `n` renewals have passed.
    RepeatN { draws: u64, current: u64 },
    Rotation { value: u64 },
    AppendBit { value: u64, draws: u64 },
    InsertBit { value: u64, draws: u64 },
    Parity { draws: u64 },
    /// Position in the shared constant-seed stream.
    ConstSeed { draws: u64 },
    TimestampSeed,
    Secure,
}

/// Everything the server remembers about one registered account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccountState {
    pub account_id: String,
    pub phone: String,
    pub state: ProfileState,
    /// Code a consume attempt is checked against; `None` until the first
    /// issue, or after invalidation under the on-consume policy.
    pub current_code: Option<String>,
    /// Renewals performed so far (the next issue has this ordinal).
    pub issue_count: u64,
    pub quota_used_today: u32,
    /// Clock reading at the most recent issue.
    pub last_issue_time: u64,
}

/// Serializable image of a harness: config, clock, and account states.
/// Written and read as JSON; used by crash-restart tests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessSnapshot {
    pub config: HarnessConfig,
    pub clock: SimClock,
    pub accounts: Vec<AccountState>,
}

impl HarnessSnapshot {
    pub fn save_to(&self, path: &Path) -> Result<(), HarnessError> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| HarnessError::Snapshot(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load_from(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Snapshot(e.to_string()))
    }
}

/// One simulated OTP server: a weakness profile, a clock, and accounts.
#[derive(Debug)]
pub struct Harness {
    config: HarnessConfig,
    /// 10^L, cached.
    modulus: u64,
    /// Shared code table (fixed-table profile only; empty otherwise).
    table: Vec<String>,
    /// Constant-seed / timestamp template with the harness OTP length
    /// already applied.
    profile_spec: Option<PrngSpec>,
    clock: RwLock<SimClock>,
    accounts: RwLock<BTreeMap<String, Arc<Mutex<AccountState>>>>,
}

impl Harness {
    /// Builds a server from a validated config. The fixed-table profile
    /// materializes its shared table here, so creation cost is paid once.
    pub fn new(config: HarnessConfig) -> Result<Self, HarnessError> {
        config.validate()?;
        let modulus = otp_modulus(config.otp_length)?;
        let mut table = Vec::new();
        let mut profile_spec = None;
        match &config.profile {
            ProfileKind::FixedTable { size, table: spec } => {
                let spec = spec.with_otp_length(config.otp_length)?;
                table = spec.otp_stream(*size)?;
            }
            ProfileKind::ConstSeed { spec } | ProfileKind::TimestampSeed { spec } => {
                profile_spec = Some(spec.with_otp_length(config.otp_length)?);
            }
            _ => {}
        }
        let clock = RwLock::new(SimClock::new(config.clock_start));
        Ok(Harness {
            config,
            modulus,
            table,
            profile_spec,
            clock,
            accounts: RwLock::new(BTreeMap::new()),
        })
    }

    /// Rebuilds a server from a snapshot, resuming exactly where the
    /// snapshotted instance stopped.
    pub fn from_snapshot(snap: HarnessSnapshot) -> Result<Self, HarnessError> {
        let harness = Harness::new(snap.config)?;
        *harness.clock.write().unwrap() = snap.clock;
        {
            let mut accounts = harness.accounts.write().unwrap();
            for account in snap.accounts {
                accounts.insert(account.account_id.clone(), Arc::new(Mutex::new(account)));
            }
        }
        Ok(harness)
    }

    pub fn config(&self) -> &HarnessConfig {
        &self.config
    }

    /// Current simulated time.
    pub fn now(&self) -> u64 {
        self.clock.read().unwrap().now()
    }

    /// Creates an account. Registration is deterministic: the account's
    /// generator position is derived from the config and the account id
    /// alone, never from registration order.
    pub fn register(&self, account_id: &str, phone: &str) -> Result<(), HarnessError> {
        if account_id.is_empty() {
            return Err(HarnessError::EmptyAccountId);
        }
        let state = self.initial_profile_state(account_id)?;
        let mut accounts = self.accounts.write().unwrap();
        if accounts.contains_key(account_id) {
            return Err(HarnessError::AccountExists(account_id.to_string()));
        }
        accounts.insert(
            account_id.to_string(),
            Arc::new(Mutex::new(AccountState {
                account_id: account_id.to_string(),
                phone: phone.to_string(),
                state,
                current_code: None,
                issue_count: 0,
                quota_used_today: 0,
                last_issue_time: 0,
            })),
        );
        Ok(())
    }

    /// Handles one OTP request: checks quota, renews the code if the
    /// renewal policy says so, and returns the rendered SMS body.
    pub fn request_otp(&self, account_id: &str) -> Result<String, HarnessError> {
        let now = self.now();
        let account = self.account(account_id)?;
        let mut st = account.lock().unwrap();
        if let Some(quota) = self.config.daily_quota {
            if st.quota_used_today >= quota {
                return Err(HarnessError::QuotaExceeded);
            }
        }
        st.quota_used_today += 1;
        let needs_fresh = match self.config.renewal {
            RenewalPolicy::PerRequest => true,
            RenewalPolicy::OnConsume => st.current_code.is_none(),
            RenewalPolicy::AfterDuration { seconds } => {
                st.current_code.is_none() || now - st.last_issue_time >= seconds
            }
        };
        if needs_fresh {
            let code = self.next_code(&mut st, now)?;
            st.current_code = Some(code);
            st.issue_count += 1;
            st.last_issue_time = now;
        }
        let code = st.current_code.as_deref().expect("code issued above");
        render_sms(&self.config.template, code)
    }

    /// Checks a submitted code against the account's current one. A valid
    /// consume invalidates the code only under the on-consume policy; the
    /// other policies leave it in place.
    pub fn consume(&self, account_id: &str, code: &str) -> Result<bool, HarnessError> {
        let account = self.account(account_id)?;
        let mut st = account.lock().unwrap();
        let valid = st.current_code.as_deref() == Some(code);
        if valid && self.config.renewal == RenewalPolicy::OnConsume {
            st.current_code = None;
        }
        Ok(valid)
    }

    /// Moves simulated time forward. Crossing a simulated midnight (UTC:
    /// day ordinal = floor(now / 86400)) resets every account's daily
    /// quota. Negative deltas are rejected; zero changes nothing.
    pub fn advance_clock(&self, delta_seconds: i64) -> Result<u64, HarnessError> {
        let mut clock = self.clock.write().unwrap();
        let day_before = clock.day();
        let now = clock.advance(delta_seconds)?;
        if clock.day() != day_before {
            let accounts = self.accounts.read().unwrap();
            for account in accounts.values() {
                account.lock().unwrap().quota_used_today = 0;
            }
        }
        Ok(now)
    }

    /// Copies out the full server state.
    pub fn snapshot(&self) -> HarnessSnapshot {
        let clock = *self.clock.read().unwrap();
        let accounts = self.accounts.read().unwrap();
        HarnessSnapshot {
            config: self.config.clone(),
            clock,
            accounts: accounts
                .values()
                .map(|a| a.lock().unwrap().clone())
                .collect(),
        }
    }

    /// Registered account ids, sorted.
    pub fn account_ids(&self) -> Vec<String> {
        self.accounts.read().unwrap().keys().cloned().collect()
    }

    fn account(&self, account_id: &str) -> Result<Arc<Mutex<AccountState>>, HarnessError> {
        self.accounts
            .read()
            .unwrap()
            .get(account_id)
            .cloned()
            .ok_or_else(|| HarnessError::UnknownAccount(account_id.to_string()))
    }

    /// Profile state at registration. Initial values are drawn from the
    /// account stream, so they are a pure function of config + account id.
    fn initial_profile_state(&self, account_id: &str) -> Result<ProfileState, HarnessError> {
        Ok(match &self.config.profile {
            ProfileKind::StaticPerAccount => ProfileState::Static,
            ProfileKind::FixedTable { .. } => ProfileState::FixedTable { position: 0 },
            ProfileKind::RepeatN { .. } => ProfileState::RepeatN {
                draws: 0,
                current: 0,
            },
            ProfileKind::Rotation { width, .. } => {
                let mut rng = self.account_rng(account_id, 0)?;
                // Exactly `width` bits with the top bit set; the all-ones
                // value is a rotation fixed point, so step past it.
                let msb = 1u64 << (width - 1);
                let mut value = msb | (u64::from(rng.next_raw()) & (msb - 1));
                if value == (1u64 << width) - 1 {
                    value &= !1;
                }
                ProfileState::Rotation { value }
            }
            ProfileKind::AppendBit => {
                let mut rng = self.account_rng(account_id, 0)?;
                let mut draws = 0u64;
                // Zero is a fixed point of doubling; redraw past it.
                let value = loop {
                    let v = u64::from(rng.next_raw()) % self.modulus;
                    draws += 1;
                    if v != 0 {
                        break v;
                    }
                };
                ProfileState::AppendBit { value, draws }
            }
            ProfileKind::InsertBit { .. } => {
                let mut rng = self.account_rng(account_id, 0)?;
                let value = insert_initial_value(rng.next_raw());
                ProfileState::InsertBit { value, draws: 1 }
            }
            ProfileKind::Parity { .. } => ProfileState::Parity { draws: 0 },
            ProfileKind::ConstSeed { .. } => ProfileState::ConstSeed { draws: 0 },
            ProfileKind::TimestampSeed { .. } => ProfileState::TimestampSeed,
            ProfileKind::Secure => ProfileState::Secure,
        })
    }

    /// The account's private stream with `consumed` raw outputs already
    /// skipped. Rebuilding and replaying keeps generator internals out of
    /// the account state (and out of snapshots).
    fn account_rng(&self, account_id: &str, consumed: u64) -> Result<GeneratorState, PrngError> {
        let seed = account_stream_seed(self.config.base_seed, account_id);
        let mut rng = PrngSpec::mt19937(u64::from(seed)).make_generator()?;
        for _ in 0..consumed {
            rng.next_raw();
        }
        Ok(rng)
    }

    /// Produces the next code for one account according to the profile.
    /// `st.issue_count` is the ordinal of the issue being generated.
    fn next_code(&self, st: &mut AccountState, now: u64) -> Result<String, HarnessError> {
        let ordinal = st.issue_count;
        let account_id = st.account_id.clone();
        let value = match (&self.config.profile, &mut st.state) {
            (ProfileKind::StaticPerAccount, ProfileState::Static) => {
                fnv1a64(account_id.as_bytes()) % self.modulus
            }
            (ProfileKind::FixedTable { .. }, ProfileState::FixedTable { position }) => {
                let idx = (*position % self.table.len() as u64) as usize;
                *position += 1;
                return Ok(self.table[idx].clone());
            }
            (ProfileKind::RepeatN { n }, ProfileState::RepeatN { draws, current }) => {
                if ordinal % (*n as u64) == 0 {
                    let mut rng = self.account_rng(&account_id, *draws)?;
                    *current = u64::from(rng.next_raw()) % self.modulus;
                    *draws += 1;
                }
                *current
            }
            (
                ProfileKind::Rotation { width, direction },
                ProfileState::Rotation { value },
            ) => {
                if ordinal > 0 {
                    *value = rotate_once(*value, *width, *direction);
                }
                *value
            }
            (ProfileKind::AppendBit, ProfileState::AppendBit { value, draws }) => {
                if ordinal > 0 {
                    let mut rng = self.account_rng(&account_id, *draws)?;
                    let bit = u64::from(rng.next_raw() & 1);
                    *draws += 1;
                    *value = (*value * 2 + bit) % self.modulus;
                }
                *value
            }
            (ProfileKind::InsertBit { position }, ProfileState::InsertBit { value, draws }) => {
                if ordinal > 0 {
                    let width = 64 - value.leading_zeros();
                    if 1u64 << (width + 1) > self.modulus {
                        // One more insertion could outgrow the digit
                        // budget: restart from a fresh short value.
                        let mut rng = self.account_rng(&account_id, *draws)?;
                        *value = insert_initial_value(rng.next_raw());
                        *draws += 1;
                    } else {
                        let mut rng = self.account_rng(&account_id, *draws)?;
                        let mut bit = u64::from(rng.next_raw() & 1);
                        *draws += 1;
                        if *position == 0 {
                            // A zero bit in front would be a leading zero,
                            // not a one-bit growth; force it set.
                            bit = 1;
                        }
                        let split = width - *position;
                        let high = *value >> split;
                        let low = *value & ((1u64 << split) - 1);
                        *value = (high << (split + 1)) | (bit << split) | low;
                    }
                }
                *value
            }
            (ProfileKind::Parity { pattern }, ProfileState::Parity { draws }) => {
                let mut rng = self.account_rng(&account_id, *draws)?;
                let v = u64::from(rng.next_raw()) % self.modulus;
                *draws += 1;
                match pattern {
                    ParityPattern::AllEven => v & !1,
                    ParityPattern::AllOdd => v | 1,
                    ParityPattern::Alternating => {
                        if ordinal % 2 == 0 {
                            v & !1
                        } else {
                            v | 1
                        }
                    }
                }
            }
            (ProfileKind::ConstSeed { .. }, ProfileState::ConstSeed { draws }) => {
                let spec = self.profile_spec.as_ref().expect("set for const_seed");
                let mut rng = spec.make_generator()?;
                for _ in 0..*draws {
                    rng.next_raw();
                }
                *draws += 1;
                return Ok(rng.draw_otp(self.config.otp_length)?);
            }
            (ProfileKind::TimestampSeed { .. }, ProfileState::TimestampSeed) => {
                let spec = self.profile_spec.as_ref().expect("set for timestamp_seed");
                let seed = clock_seed(now, self.config.clock_skew);
                let mut rng = spec.with_seed(seed).make_generator()?;
                return Ok(rng.draw_otp(self.config.otp_length)?);
            }
            (ProfileKind::Secure, ProfileState::Secure) => {
                return Ok(GeneratorState::OsCsprng.draw_otp(self.config.otp_length)?);
            }
            (profile, state) => {
                return Err(HarnessError::Snapshot(format!(
                    "account state {state:?} does not match profile {}",
                    profile.label()
                )));
            }
        };
        Ok(format_code(value, self.config.otp_length))
    }
}

/// Renders one SMS body. The template must contain the `{code}`
/// placeholder exactly once; anything else is a config error.
pub fn render_sms(template: &str, code: &str) -> Result<String, HarnessError> {
    validate_template(template)?;
    Ok(template.replacen("{code}", code, 1))
}

fn validate_template(template: &str) -> Result<(), HarnessError> {
    if template.matches("{code}").count() != 1 {
        return Err(HarnessError::BadTemplate);
    }
    Ok(())
}

/// FNV-1a 64-bit hash; drives the static per-account profile.
fn fnv1a64(data: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &byte in data {
        hash ^= u64::from(byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// 32-bit seed for an account's private stream: account hash mixed with
/// the server's base seed. Pure, so registration order never matters.
fn account_stream_seed(base_seed: u64, account_id: &str) -> u32 {
    let mixed = fnv1a64(account_id.as_bytes()) ^ base_seed.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ((mixed >> 32) ^ mixed) as u32
}

/// Seed a timestamp profile uses at clock reading `now`: the skew is added
/// with saturation so a misconfigured skew cannot panic.
fn clock_seed(now: u64, skew: i64) -> u64 {
    now.checked_add_signed(skew).unwrap_or(0)
}

fn rotate_once(value: u64, width: u32, direction: RotationDirection) -> u64 {
    let mask = (1u64 << width) - 1;
    match direction {
        RotationDirection::Anticlockwise => ((value << 1) | (value >> (width - 1))) & mask,
        RotationDirection::Clockwise => ((value >> 1) | ((value & 1) << (width - 1))) & mask,
    }
}

/// Fresh starting value for the insert-bit profile: exactly
/// [`INSERT_INITIAL_BITS`] bits, top bit set.
fn insert_initial_value(raw: u32) -> u64 {
    let base = 1u64 << (INSERT_INITIAL_BITS - 1);
    base + u64::from(raw) % base
}

fn format_code(value: u64, len: OtpLength) -> String {
    format!("{value:0width$}", width = len as usize)
}

const HARNESS_KEYS: &[&str] = &[
    "profile",
    "otp_length",
    "renewal",
    "renewal_seconds",
    "quota",
    "template",
    "base_seed",
    "clock_start",
    "clock_skew",
    "table_size",
    "repeat",
    "width",
    "direction",
    "insert_position",
    "parity",
];

impl HarnessConfig {
    /// Reads a server config from key-value text. The generator-spec keys
    /// (`preset`, `seed`, ...) live in the same file for profiles that
    /// embed a generator.
    pub fn from_config_str(text: &str) -> Result<Self, HarnessError> {
        let kv = KvMap::parse(text)?;
        Self::from_kv(&kv)
    }

    fn from_kv(kv: &KvMap) -> Result<Self, HarnessError> {
        let profile_name = kv
            .get("profile")
            .ok_or(ConfigError::MissingKey("profile"))?;

        // Profiles embedding a generator accept the generator-spec keys;
        // for every other profile those keys are typos.
        let embeds_generator = matches!(profile_name, "fixed_table" | "const_seed" | "timestamp_seed");
        if embeds_generator {
            let known: Vec<&str> = HARNESS_KEYS.iter().chain(SPEC_KEYS).copied().collect();
            if let Some(unknown) = kv.unknown_keys(&known).into_iter().next() {
                return Err(ConfigError::UnknownKey(unknown).into());
            }
        } else if let Some(unknown) = kv.unknown_keys(HARNESS_KEYS).into_iter().next() {
            return Err(ConfigError::UnknownKey(unknown).into());
        }

        let otp_length = kv.get_u64("otp_length")?.unwrap_or(6) as OtpLength;
        let base_seed = kv.get_u64("base_seed")?.unwrap_or(1);

        // Keys only meaningful for one profile are rejected elsewhere so a
        // stray `width = ...` on a parity config fails loudly.
        let only_for = |key: &'static str, allowed: bool| -> Result<(), HarnessError> {
            if kv.get(key).is_some() && !allowed {
                Err(HarnessError::BadProfile(format!(
                    "key {key:?} is not valid for profile {profile_name:?}"
                )))
            } else {
                Ok(())
            }
        };
        only_for("table_size", profile_name == "fixed_table")?;
        only_for("repeat", profile_name == "repeat_n")?;
        only_for("width", profile_name == "rotation")?;
        only_for("direction", profile_name == "rotation")?;
        only_for("insert_position", profile_name == "insert_bit")?;
        only_for("parity", profile_name == "parity")?;
        only_for("clock_skew", profile_name == "timestamp_seed")?;

        let embedded_spec = || -> Result<PrngSpec, HarnessError> {
            let known: Vec<&str> = HARNESS_KEYS.iter().chain(SPEC_KEYS).copied().collect();
            Ok(PrngSpec::from_kv(kv, &known)?)
        };

        let profile = match profile_name {
            "static_per_account" => ProfileKind::StaticPerAccount,
            "fixed_table" => {
                let size = kv.get_u64("table_size")?.unwrap_or(624) as usize;
                let table = if kv.get("preset").is_some() || kv.get("algorithm").is_some() {
                    embedded_spec()?
                } else {
                    PrngSpec::mt19937(base_seed)
                };
                ProfileKind::FixedTable { size, table }
            }
            "repeat_n" => {
                let n = kv
                    .get_u64("repeat")?
                    .ok_or(ConfigError::MissingKey("repeat"))? as usize;
                ProfileKind::RepeatN { n }
            }
            "rotation" => {
                let width = kv
                    .get_u64("width")?
                    .ok_or(ConfigError::MissingKey("width"))? as u32;
                let direction = match kv.get("direction").unwrap_or("anticlockwise") {
                    "anticlockwise" => RotationDirection::Anticlockwise,
                    "clockwise" => RotationDirection::Clockwise,
                    other => {
                        return Err(ConfigError::BadValue {
                            key: "direction".to_string(),
                            value: other.to_string(),
                        }
                        .into())
                    }
                };
                ProfileKind::Rotation { width, direction }
            }
            "append_bit" => ProfileKind::AppendBit,
            "insert_bit" => {
                let position = kv.get_u64("insert_position")?.unwrap_or(3) as u32;
                ProfileKind::InsertBit { position }
            }
            "parity" => {
                let pattern = match kv.get("parity").ok_or(ConfigError::MissingKey("parity"))? {
                    "all_even" => ParityPattern::AllEven,
                    "all_odd" => ParityPattern::AllOdd,
                    "alternating" => ParityPattern::Alternating,
                    other => {
                        return Err(ConfigError::BadValue {
                            key: "parity".to_string(),
                            value: other.to_string(),
                        }
                        .into())
                    }
                };
                ProfileKind::Parity { pattern }
            }
            "const_seed" => ProfileKind::ConstSeed {
                spec: embedded_spec()?,
            },
            "timestamp_seed" => ProfileKind::TimestampSeed {
                spec: embedded_spec()?,
            },
            "secure" => ProfileKind::Secure,
            other => {
                return Err(ConfigError::BadValue {
                    key: "profile".to_string(),
                    value: other.to_string(),
                }
                .into())
            }
        };

        let renewal = match kv.get("renewal").unwrap_or("per_request") {
            "per_request" => RenewalPolicy::PerRequest,
            "on_consume" => RenewalPolicy::OnConsume,
            "after_duration" => RenewalPolicy::AfterDuration {
                seconds: kv
                    .get_u64("renewal_seconds")?
                    .ok_or(ConfigError::MissingKey("renewal_seconds"))?,
            },
            other => {
                return Err(ConfigError::BadValue {
                    key: "renewal".to_string(),
                    value: other.to_string(),
                }
                .into())
            }
        };
        if !matches!(renewal, RenewalPolicy::AfterDuration { .. })
            && kv.get("renewal_seconds").is_some()
        {
            return Err(HarnessError::BadProfile(
                "key \"renewal_seconds\" is only valid with renewal = after_duration".to_string(),
            ));
        }

        let daily_quota = match kv.get("quota") {
            None => Some(DEFAULT_DAILY_QUOTA),
            Some("off") => None,
            Some(text) => Some(
                crate::config::parse_u64(text)
                    .and_then(|v| u32::try_from(v).ok())
                    .ok_or_else(|| ConfigError::BadInt {
                        key: "quota".to_string(),
                        value: text.to_string(),
                    })?,
            ),
        };

        let clock_skew = match kv.get("clock_skew") {
            None => 0,
            Some(text) => text.parse::<i64>().map_err(|_| ConfigError::BadInt {
                key: "clock_skew".to_string(),
                value: text.to_string(),
            })?,
        };

        let config = HarnessConfig {
            profile,
            otp_length,
            renewal,
            daily_quota,
            template: kv
                .get("template")
                .unwrap_or(DEFAULT_SMS_TEMPLATE)
                .to_string(),
            base_seed,
            clock_start: kv.get_u64("clock_start")?.unwrap_or(DEFAULT_CLOCK_START),
            clock_skew,
        };
        config.validate()?;
        Ok(config)
    }
}
