use super::*;
use crate::rules::{ParityPattern, RotationDirection};

/// Config with a bare `{code}` template so tests read codes directly.
fn cfg(profile: ProfileKind) -> HarnessConfig {
    let mut config = HarnessConfig::new(profile);
    config.template = "{code}".to_string();
    config
}

fn boot(config: HarnessConfig, accounts: &[&str]) -> Harness {
    let harness = Harness::new(config).unwrap();
    for id in accounts {
        harness.register(id, "+15550100").unwrap();
    }
    harness
}

fn codes(harness: &Harness, account: &str, n: usize) -> Vec<String> {
    (0..n).map(|_| harness.request_otp(account).unwrap()).collect()
}

/// The account's private stream as the profiles consume it: raw 32-bit
/// outputs reduced mod 10^L, with `skip` raw draws discarded first.
fn account_stream(base_seed: u64, account_id: &str, skip: u64, n: usize, modulus: u64) -> Vec<u64> {
    let seed = account_stream_seed(base_seed, account_id);
    let mut rng = PrngSpec::mt19937(u64::from(seed)).make_generator().unwrap();
    for _ in 0..skip {
        rng.next_raw();
    }
    (0..n).map(|_| u64::from(rng.next_raw()) % modulus).collect()
}

// --- config parsing ---

#[test]
fn parses_a_full_config() {
    let text = "\
# simulated server under test
profile = fixed_table
table_size = 10
preset = mt19937
seed = 42
otp_length = 7
renewal = after_duration
renewal_seconds = 1200
quota = off
template = Ref 77: code {code}
base_seed = 9
clock_start = 1600000000
";
    let config = HarnessConfig::from_config_str(text).unwrap();
    assert_eq!(
        config.profile,
        ProfileKind::FixedTable {
            size: 10,
            table: PrngSpec::mt19937(42).with_otp_length(7).unwrap(),
        }
    );
    assert_eq!(config.otp_length, 7);
    assert_eq!(config.renewal, RenewalPolicy::AfterDuration { seconds: 1200 });
    assert_eq!(config.daily_quota, None);
    assert_eq!(config.template, "Ref 77: code {code}");
    assert_eq!(config.base_seed, 9);
    assert_eq!(config.clock_start, 1_600_000_000);
}

#[test]
fn config_defaults_apply() {
    let config = HarnessConfig::from_config_str("profile = static_per_account\n").unwrap();
    assert_eq!(config.profile, ProfileKind::StaticPerAccount);
    assert_eq!(config.otp_length, 6);
    assert_eq!(config.renewal, RenewalPolicy::PerRequest);
    assert_eq!(config.daily_quota, Some(DEFAULT_DAILY_QUOTA));
    assert_eq!(config.template, DEFAULT_SMS_TEMPLATE);
    assert_eq!(config.base_seed, 1);
    assert_eq!(config.clock_start, DEFAULT_CLOCK_START);
    assert_eq!(config.clock_skew, 0);
}

#[test]
fn rejects_unknown_keys() {
    let err = HarnessConfig::from_config_str("profile = secure\ncolour = red\n").unwrap_err();
    assert!(matches!(
        err,
        HarnessError::Config(ConfigError::UnknownKey(ref k)) if k == "colour"
    ));
}

#[test]
fn rejects_generator_keys_on_plain_profiles() {
    let err =
        HarnessConfig::from_config_str("profile = static_per_account\npreset = c_rand\n")
            .unwrap_err();
    assert!(matches!(
        err,
        HarnessError::Config(ConfigError::UnknownKey(ref k)) if k == "preset"
    ));
}

#[test]
fn rejects_profile_param_keys_on_other_profiles() {
    let err = HarnessConfig::from_config_str("profile = parity\nparity = all_even\nwidth = 17\n")
        .unwrap_err();
    let HarnessError::BadProfile(msg) = err else {
        panic!("expected BadProfile, got {err:?}");
    };
    assert!(msg.contains("width"), "got: {msg}");
}

#[test]
fn missing_profile_key_is_an_error() {
    let err = HarnessConfig::from_config_str("quota = 5\n").unwrap_err();
    assert!(matches!(
        err,
        HarnessError::Config(ConfigError::MissingKey("profile"))
    ));
}

#[test]
fn quota_zero_is_rejected_but_off_disables() {
    let err = HarnessConfig::from_config_str("profile = secure\nquota = 0\n").unwrap_err();
    assert!(matches!(err, HarnessError::BadProfile(_)));
    let config = HarnessConfig::from_config_str("profile = secure\nquota = off\n").unwrap();
    assert_eq!(config.daily_quota, None);
}

#[test]
fn repeat_needs_at_least_two() {
    let err = HarnessConfig::from_config_str("profile = repeat_n\nrepeat = 1\n").unwrap_err();
    assert!(matches!(err, HarnessError::BadProfile(_)));
    let err = HarnessConfig::from_config_str("profile = repeat_n\n").unwrap_err();
    assert!(matches!(
        err,
        HarnessError::Config(ConfigError::MissingKey("repeat"))
    ));
}

#[test]
fn rotation_width_must_fit_the_digit_budget() {
    let err = HarnessConfig::from_config_str("profile = rotation\nwidth = 17\notp_length = 4\n")
        .unwrap_err();
    assert!(matches!(err, HarnessError::BadProfile(_)));
    // 2^17 - 1 = 131071 fits six digits.
    HarnessConfig::from_config_str("profile = rotation\nwidth = 17\n").unwrap();
}

#[test]
fn template_needs_exactly_one_placeholder() {
    for template in ["no placeholder here", "{code} and {code}"] {
        let text = format!("profile = secure\ntemplate = {template}\n");
        let err = HarnessConfig::from_config_str(&text).unwrap_err();
        assert!(matches!(err, HarnessError::BadTemplate), "{template:?}");
    }
}

#[test]
fn renewal_seconds_only_valid_with_after_duration() {
    let err =
        HarnessConfig::from_config_str("profile = secure\nrenewal_seconds = 60\n").unwrap_err();
    assert!(matches!(err, HarnessError::BadProfile(_)));
    let err = HarnessConfig::from_config_str("profile = secure\nrenewal = after_duration\n")
        .unwrap_err();
    assert!(matches!(
        err,
        HarnessError::Config(ConfigError::MissingKey("renewal_seconds"))
    ));
}

#[test]
fn timestamp_config_takes_a_negative_skew() {
    let text = "profile = timestamp_seed\npreset = mt19937\nclock_skew = -4\n";
    let config = HarnessConfig::from_config_str(text).unwrap();
    assert_eq!(config.clock_skew, -4);
    let err = HarnessConfig::from_config_str("profile = secure\nclock_skew = 3\n").unwrap_err();
    assert!(matches!(err, HarnessError::BadProfile(_)));
}

#[test]
fn seeded_profiles_reject_the_os_generator() {
    for profile in [
        ProfileKind::ConstSeed {
            spec: PrngSpec::os_csprng(),
        },
        ProfileKind::TimestampSeed {
            spec: PrngSpec::os_csprng(),
        },
    ] {
        let err = Harness::new(cfg(profile)).unwrap_err();
        assert!(matches!(err, HarnessError::BadProfile(_)));
    }
}

// --- clock ---

#[test]
fn clock_moves_only_forward_by_request() {
    let harness = boot(cfg(ProfileKind::Secure), &[]);
    assert_eq!(harness.now(), DEFAULT_CLOCK_START);
    assert_eq!(harness.advance_clock(90).unwrap(), DEFAULT_CLOCK_START + 90);
    assert_eq!(harness.advance_clock(0).unwrap(), DEFAULT_CLOCK_START + 90);
    let err = harness.advance_clock(-1).unwrap_err();
    assert!(matches!(err, HarnessError::NegativeClockDelta(-1)));
    assert_eq!(harness.now(), DEFAULT_CLOCK_START + 90);
}

// --- static profile ---

#[test]
fn static_codes_are_stable_and_differ_per_account() {
    let harness = boot(
        cfg(ProfileKind::StaticPerAccount),
        &["alice", "bob", "carol"],
    );
    // Expected values computed with an independent FNV-1a implementation.
    assert_eq!(codes(&harness, "alice", 20), vec!["266183".to_string(); 20]);
    assert_eq!(codes(&harness, "bob", 1), ["211092"]);
    assert_eq!(codes(&harness, "carol", 1), ["590962"]);
}

#[test]
fn static_code_is_reissued_after_consume() {
    let mut config = cfg(ProfileKind::StaticPerAccount);
    config.renewal = RenewalPolicy::OnConsume;
    let harness = boot(config, &["alice"]);
    let code = harness.request_otp("alice").unwrap();
    assert!(harness.consume("alice", &code).unwrap());
    assert_eq!(harness.request_otp("alice").unwrap(), code);
}

// --- fixed table ---

#[test]
fn fixed_table_walks_the_generator_stream() {
    let config = cfg(ProfileKind::FixedTable {
        size: 10,
        table: PrngSpec::mt19937(42),
    });
    let harness = boot(config, &["alice", "bob"]);
    let expected = PrngSpec::mt19937(42).otp_stream(10).unwrap();
    let mut cycled = expected.clone();
    cycled.extend(expected.iter().cloned());
    assert_eq!(codes(&harness, "alice", 20), cycled);
    // Every account starts from table position zero.
    assert_eq!(codes(&harness, "bob", 3), expected[..3]);
}

#[test]
fn fixed_table_defaults_to_the_base_seed() {
    let config =
        HarnessConfig::from_config_str("profile = fixed_table\nbase_seed = 7\ntemplate = {code}\n")
            .unwrap();
    let harness = boot(config, &["alice"]);
    assert_eq!(
        codes(&harness, "alice", 3),
        PrngSpec::mt19937(7).otp_stream(3).unwrap()
    );
}

// --- repeat blocks ---

#[test]
fn repeat_profile_serves_each_fresh_code_n_times() {
    let config = cfg(ProfileKind::RepeatN { n: 3 });
    let harness = boot(config, &["alice"]);
    let got = codes(&harness, "alice", 7);
    let fresh = account_stream(1, "alice", 0, 3, 1_000_000);
    let expected: Vec<String> = [
        fresh[0], fresh[0], fresh[0],
        fresh[1], fresh[1], fresh[1],
        fresh[2],
    ]
    .iter()
    .map(|v| format_code(*v, 6))
    .collect();
    assert_eq!(got, expected);
    assert_ne!(fresh[0], fresh[1], "stream values should differ");
}

// --- rotation ---

#[test]
fn rotation_steps_one_bit_per_issue() {
    for direction in [RotationDirection::Anticlockwise, RotationDirection::Clockwise] {
        let config = cfg(ProfileKind::Rotation {
            width: 17,
            direction,
        });
        let harness = boot(config, &["alice"]);
        let got = codes(&harness, "alice", 20);
        let first: u64 = got[0].parse().unwrap();
        assert_eq!(64 - first.leading_zeros(), 17, "initial uses all 17 bits");
        let mut value = first;
        for code in &got[1..] {
            value = rotate_once(value, 17, direction);
            assert_eq!(*code, format_code(value, 6));
        }
    }
}

#[test]
fn rotation_initial_value_avoids_the_all_ones_fixed_point() {
    let config = cfg(ProfileKind::Rotation {
        width: 5,
        direction: RotationDirection::Anticlockwise,
    });
    let harness = Harness::new(config).unwrap();
    for i in 0..50 {
        let id = format!("acct-{i}");
        harness.register(&id, "+15550100").unwrap();
        let first: u64 = harness.request_otp(&id).unwrap().parse().unwrap();
        assert!(first >= 16 && first < 31, "got {first}");
    }
}

// --- append bit ---

#[test]
fn append_profile_doubles_and_appends_the_stream_bit() {
    let config = cfg(ProfileKind::AppendBit);
    let harness = boot(config, &["alice"]);
    let got: Vec<u64> = codes(&harness, "alice", 20)
        .iter()
        .map(|c| c.parse().unwrap())
        .collect();
    assert_ne!(got[0], 0, "starting value must not be the doubling fixed point");
    // Replay the account stream: initial value, then one bit per issue.
    let seed = account_stream_seed(1, "alice");
    let mut rng = PrngSpec::mt19937(u64::from(seed)).make_generator().unwrap();
    let mut value = loop {
        let v = u64::from(rng.next_raw()) % 1_000_000;
        if v != 0 {
            break v;
        }
    };
    assert_eq!(got[0], value);
    for &next in &got[1..] {
        let bit = u64::from(rng.next_raw() & 1);
        value = (value * 2 + bit) % 1_000_000;
        assert_eq!(next, value);
    }
}

// --- insert bit ---

fn bits(v: u64) -> String {
    format!("{v:b}")
}

#[test]
fn insert_profile_grows_one_bit_at_the_position() {
    let mut config = cfg(ProfileKind::InsertBit { position: 3 });
    config.otp_length = 8;
    let harness = boot(config, &["alice"]);
    let got: Vec<u64> = codes(&harness, "alice", 20)
        .iter()
        .map(|c| c.parse().unwrap())
        .collect();
    assert_eq!(bits(got[0]).len(), 6);
    for pair in got.windows(2) {
        let s = bits(pair[0]);
        let t = bits(pair[1]);
        assert_eq!(t.len(), s.len() + 1);
        assert_eq!(t[..3], s[..3], "prefix above the insertion point");
        assert_eq!(t[4..], s[3..], "suffix below the insertion point");
    }
}

#[test]
fn insert_profile_restarts_before_overflowing_the_digits() {
    let mut config = cfg(ProfileKind::InsertBit { position: 2 });
    config.otp_length = 4;
    config.daily_quota = None;
    let harness = boot(config, &["alice"]);
    let got: Vec<u64> = codes(&harness, "alice", 30)
        .iter()
        .map(|c| c.parse().unwrap())
        .collect();
    for (i, v) in got.iter().enumerate() {
        assert!(*v < 10_000);
        // Widths cycle 6..=13, then restart from a fresh 6-bit value.
        assert_eq!(bits(*v).len(), 6 + (i % 8), "issue {i}");
    }
}

#[test]
fn insert_at_the_front_always_sets_the_new_bit() {
    let mut config = cfg(ProfileKind::InsertBit { position: 0 });
    config.otp_length = 8;
    let harness = boot(config, &["alice"]);
    let got: Vec<u64> = codes(&harness, "alice", 10)
        .iter()
        .map(|c| c.parse().unwrap())
        .collect();
    for pair in got.windows(2) {
        assert_eq!(bits(pair[1]), format!("1{}", bits(pair[0])));
    }
}

// --- parity ---

#[test]
fn parity_profiles_pin_the_low_bit() {
    for (pattern, check) in [
        (ParityPattern::AllEven, &((|v, _| v % 2 == 0) as fn(u64, usize) -> bool)),
        (ParityPattern::AllOdd, &((|v, _| v % 2 == 1) as fn(u64, usize) -> bool)),
        (
            ParityPattern::Alternating,
            &((|v, i| (v % 2 == 0) == (i % 2 == 0)) as fn(u64, usize) -> bool),
        ),
    ] {
        let config = cfg(ProfileKind::Parity { pattern });
        let harness = boot(config, &["alice"]);
        let got: Vec<u64> = codes(&harness, "alice", 20)
            .iter()
            .map(|c| c.parse().unwrap())
            .collect();
        for (i, v) in got.iter().enumerate() {
            assert!(check(*v, i), "{pattern:?} issue {i} value {v}");
        }
        // The upper digits still follow the account stream.
        let stream = account_stream(1, "alice", 0, 20, 1_000_000);
        for (v, s) in got.iter().zip(&stream) {
            assert_eq!(v >> 1, s >> 1);
        }
    }
}

// --- constant seed ---

#[test]
fn const_seed_serves_one_shared_stream_from_position_zero() {
    let config = cfg(ProfileKind::ConstSeed {
        spec: PrngSpec::c_rand(1),
    });
    let harness = boot(config, &["alice", "bob"]);
    let expected = PrngSpec::c_rand(1).otp_stream(10).unwrap();
    assert_eq!(codes(&harness, "alice", 10), expected);
    // Every account replays the very same stream.
    assert_eq!(codes(&harness, "bob", 10), expected);
}

// --- timestamp seed ---

#[test]
fn timestamp_profile_reseeds_from_the_clock() {
    let mut config = cfg(ProfileKind::TimestampSeed {
        spec: PrngSpec::mt19937(0),
    });
    config.clock_skew = 3;
    let harness = boot(config, &["alice"]);
    let t0 = harness.now();
    let expected_at = |t: u64| {
        PrngSpec::mt19937(t + 3)
            .otp_stream(1)
            .unwrap()
            .remove(0)
    };
    // A frozen clock means a frozen seed: every request repeats the code.
    assert_eq!(harness.request_otp("alice").unwrap(), expected_at(t0));
    assert_eq!(harness.request_otp("alice").unwrap(), expected_at(t0));
    harness.advance_clock(60).unwrap();
    assert_eq!(harness.request_otp("alice").unwrap(), expected_at(t0 + 60));
}

#[test]
fn clock_seed_saturates_instead_of_underflowing() {
    assert_eq!(clock_seed(5, -10), 0);
    assert_eq!(clock_seed(100, -40), 60);
    assert_eq!(clock_seed(100, 40), 140);
}

// --- secure control ---

#[test]
fn secure_profile_draws_fresh_entropy() {
    let make = || {
        let harness = boot(cfg(ProfileKind::Secure), &["alice"]);
        codes(&harness, "alice", 12)
    };
    let a = make();
    let b = make();
    assert_ne!(a, b, "independent runs must not repeat a 12-code stream");
    assert!(a.iter().any(|c| c != &a[0]), "stream should vary");
}

// --- renewal policies ---

#[test]
fn per_request_renews_every_call() {
    let config = cfg(ProfileKind::ConstSeed {
        spec: PrngSpec::c_rand(1),
    });
    let harness = boot(config, &["alice"]);
    assert_eq!(
        codes(&harness, "alice", 5),
        PrngSpec::c_rand(1).otp_stream(5).unwrap()
    );
}

#[test]
fn on_consume_holds_the_code_until_it_is_used() {
    let mut config = cfg(ProfileKind::ConstSeed {
        spec: PrngSpec::c_rand(1),
    });
    config.renewal = RenewalPolicy::OnConsume;
    let harness = boot(config, &["alice"]);
    let stream = PrngSpec::c_rand(1).otp_stream(2).unwrap();
    for _ in 0..3 {
        assert_eq!(harness.request_otp("alice").unwrap(), stream[0]);
    }
    assert!(harness.consume("alice", &stream[0]).unwrap());
    assert_eq!(harness.request_otp("alice").unwrap(), stream[1]);
    assert!(!harness.consume("alice", &stream[0]).unwrap());
}

#[test]
fn after_duration_renews_once_the_code_is_stale() {
    let mut config = cfg(ProfileKind::ConstSeed {
        spec: PrngSpec::c_rand(1),
    });
    config.renewal = RenewalPolicy::AfterDuration { seconds: 1200 };
    let harness = boot(config, &["alice"]);
    let stream = PrngSpec::c_rand(1).otp_stream(2).unwrap();
    assert_eq!(harness.request_otp("alice").unwrap(), stream[0]);
    harness.advance_clock(600).unwrap();
    assert_eq!(harness.request_otp("alice").unwrap(), stream[0]);
    harness.advance_clock(600).unwrap();
    assert_eq!(harness.request_otp("alice").unwrap(), stream[1]);
}

#[test]
fn a_frozen_clock_never_renews_a_duration_code() {
    let mut config = cfg(ProfileKind::ConstSeed {
        spec: PrngSpec::c_rand(1),
    });
    config.renewal = RenewalPolicy::AfterDuration { seconds: 1 };
    config.daily_quota = None;
    let harness = boot(config, &["alice"]);
    let first = harness.request_otp("alice").unwrap();
    for _ in 0..50 {
        assert_eq!(harness.request_otp("alice").unwrap(), first);
    }
}

// --- quota ---

#[test]
fn the_twenty_first_same_day_request_hits_the_quota() {
    let harness = boot(cfg(ProfileKind::StaticPerAccount), &["alice", "bob"]);
    for _ in 0..20 {
        harness.request_otp("alice").unwrap();
    }
    let err = harness.request_otp("alice").unwrap_err();
    assert!(matches!(err, HarnessError::QuotaExceeded));
    // Quota is per account.
    harness.request_otp("bob").unwrap();
}

#[test]
fn quota_resets_when_the_simulated_day_rolls_over() {
    let mut config = cfg(ProfileKind::StaticPerAccount);
    // Fifty seconds before a simulated midnight.
    config.clock_start = 18_519 * 86_400 - 50;
    let harness = boot(config, &["alice"]);
    for _ in 0..20 {
        harness.request_otp("alice").unwrap();
    }
    harness.advance_clock(49).unwrap();
    assert!(matches!(
        harness.request_otp("alice").unwrap_err(),
        HarnessError::QuotaExceeded
    ));
    harness.advance_clock(1).unwrap();
    harness.request_otp("alice").unwrap();
}

#[test]
fn advancing_zero_seconds_changes_nothing() {
    let harness = boot(cfg(ProfileKind::StaticPerAccount), &["alice"]);
    for _ in 0..20 {
        harness.request_otp("alice").unwrap();
    }
    let before = harness.now();
    assert_eq!(harness.advance_clock(0).unwrap(), before);
    assert!(matches!(
        harness.request_otp("alice").unwrap_err(),
        HarnessError::QuotaExceeded
    ));
}

#[test]
fn disabling_the_quota_allows_long_sessions() {
    let mut config = cfg(ProfileKind::StaticPerAccount);
    config.daily_quota = None;
    let harness = boot(config, &["alice"]);
    for _ in 0..100 {
        harness.request_otp("alice").unwrap();
    }
}

// --- consume ---

#[test]
fn consume_checks_against_the_current_code() {
    let harness = boot(cfg(ProfileKind::StaticPerAccount), &["alice"]);
    let code = harness.request_otp("alice").unwrap();
    assert!(!harness.consume("alice", "000000").unwrap());
    assert!(harness.consume("alice", &code).unwrap());
    // Only the on-consume policy invalidates; here the code stays live.
    assert!(harness.consume("alice", &code).unwrap());
}

#[test]
fn consume_before_any_issue_is_invalid() {
    let harness = boot(cfg(ProfileKind::StaticPerAccount), &["alice"]);
    assert!(!harness.consume("alice", "266183").unwrap());
}

#[test]
fn unknown_accounts_are_rejected_everywhere() {
    let harness = boot(cfg(ProfileKind::StaticPerAccount), &[]);
    assert!(matches!(
        harness.request_otp("ghost").unwrap_err(),
        HarnessError::UnknownAccount(_)
    ));
    assert!(matches!(
        harness.consume("ghost", "123456").unwrap_err(),
        HarnessError::UnknownAccount(_)
    ));
}

#[test]
fn registration_rejects_duplicates_and_empty_ids() {
    let harness = boot(cfg(ProfileKind::StaticPerAccount), &["alice"]);
    assert!(matches!(
        harness.register("alice", "+15550101").unwrap_err(),
        HarnessError::AccountExists(_)
    ));
    assert!(matches!(
        harness.register("", "+15550101").unwrap_err(),
        HarnessError::EmptyAccountId
    ));
}

// --- determinism ---

#[test]
fn the_same_trace_replays_to_identical_sms() {
    let run = |register_order: &[&str]| {
        let config = cfg(ProfileKind::AppendBit);
        let harness = boot(config, register_order);
        let mut log = Vec::new();
        for step in 0..10 {
            log.push(harness.request_otp("alice").unwrap());
            log.push(harness.request_otp("bob").unwrap());
            if step % 3 == 0 {
                harness.advance_clock(60).unwrap();
            }
        }
        log
    };
    let first = run(&["alice", "bob"]);
    let second = run(&["alice", "bob"]);
    assert_eq!(first, second);
    // Registration order does not influence any account's stream.
    let swapped = run(&["bob", "alice"]);
    assert_eq!(first, swapped);
}

#[test]
fn accounts_get_distinct_streams() {
    let harness = boot(cfg(ProfileKind::AppendBit), &["alice", "bob"]);
    assert_ne!(codes(&harness, "alice", 5), codes(&harness, "bob", 5));
}

// --- snapshots ---

#[test]
fn snapshot_files_round_trip() {
    let harness = boot(cfg(ProfileKind::ConstSeed { spec: PrngSpec::c_rand(1) }), &["alice"]);
    codes(&harness, "alice", 3);
    harness.advance_clock(120).unwrap();
    let snap = harness.snapshot();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("server.snapshot.json");
    snap.save_to(&path).unwrap();
    assert_eq!(HarnessSnapshot::load_from(&path).unwrap(), snap);
}

#[test]
fn a_restored_harness_resumes_the_exact_streams() {
    for profile in [
        ProfileKind::ConstSeed {
            spec: PrngSpec::c_rand(1),
        },
        ProfileKind::AppendBit,
        ProfileKind::InsertBit { position: 3 },
        ProfileKind::RepeatN { n: 3 },
    ] {
        let mut config = cfg(profile);
        config.otp_length = 8;
        let original = boot(config, &["alice", "bob"]);
        codes(&original, "alice", 7);
        codes(&original, "bob", 2);
        original.advance_clock(60).unwrap();

        let restored = Harness::from_snapshot(original.snapshot()).unwrap();
        assert_eq!(restored.now(), original.now());
        assert_eq!(codes(&restored, "alice", 8), codes(&original, "alice", 8));
        assert_eq!(codes(&restored, "bob", 8), codes(&original, "bob", 8));
    }
}

#[test]
fn snapshot_preserves_quota_and_current_code() {
    let mut config = cfg(ProfileKind::StaticPerAccount);
    config.renewal = RenewalPolicy::OnConsume;
    let original = boot(config, &["alice"]);
    for _ in 0..20 {
        original.request_otp("alice").unwrap();
    }
    let restored = Harness::from_snapshot(original.snapshot()).unwrap();
    assert!(matches!(
        restored.request_otp("alice").unwrap_err(),
        HarnessError::QuotaExceeded
    ));
    assert!(restored.consume("alice", "266183").unwrap());
}

// --- SMS rendering ---

#[test]
fn render_sms_substitutes_the_placeholder() {
    assert_eq!(
        render_sms(DEFAULT_SMS_TEMPLATE, "123456").unwrap(),
        "Your verification code is 123456. Valid for 5 minutes."
    );
    assert_eq!(
        render_sms("Ref 77: code {code}", "4711").unwrap(),
        "Ref 77: code 4711"
    );
}

#[test]
fn render_sms_rejects_bad_templates() {
    for template in ["", "no code here", "{code} twice {code}"] {
        assert!(matches!(
            render_sms(template, "123456").unwrap_err(),
            HarnessError::BadTemplate
        ));
    }
}

#[test]
fn profile_labels_match_config_identifiers() {
    let cases: Vec<(ProfileKind, &str)> = vec![
        (ProfileKind::StaticPerAccount, "static_per_account"),
        (
            ProfileKind::FixedTable {
                size: 2,
                table: PrngSpec::mt19937(1),
            },
            "fixed_table",
        ),
        (ProfileKind::RepeatN { n: 2 }, "repeat_n"),
        (
            ProfileKind::Rotation {
                width: 5,
                direction: RotationDirection::Clockwise,
            },
            "rotation",
        ),
        (ProfileKind::AppendBit, "append_bit"),
        (ProfileKind::InsertBit { position: 0 }, "insert_bit"),
        (
            ProfileKind::Parity {
                pattern: ParityPattern::AllOdd,
            },
            "parity",
        ),
        (
            ProfileKind::ConstSeed {
                spec: PrngSpec::c_rand(1),
            },
            "const_seed",
        ),
        (
            ProfileKind::TimestampSeed {
                spec: PrngSpec::mt19937(0),
            },
            "timestamp_seed",
        ),
        (ProfileKind::Secure, "secure"),
    ];
    for (profile, label) in cases {
        assert_eq!(profile.label(), label);
    }
}
