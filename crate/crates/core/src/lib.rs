//! Desk-scale toolkit for auditing the randomness of SMS one-time passwords.
//!
//! The crate bundles everything needed to reproduce weak-OTP findings end to
//! end on one machine:
//!
//! - [`prng`] — reference implementations of the PRNG families weak servers
//!   use (LCGs and their c/PHP/Java presets, lagged Fibonacci, MT19937,
//!   WELL512, the PHP combined LCG, and an OS-entropy baseline), plus the
//!   OTP drawing rule (`raw mod 10^L`, zero-padded).
//! - [`recovery`] — state and seed recovery: MT19937 untempering and full
//!   state cloning, LCG parameter recovery from raw outputs, 48-bit LCG
//!   state search from two truncated outputs, seed brute force over a code
//!   template, and timestamp-seed matching.
//! - [`rules`] — the rule engine that checks collected OTP sequences for
//!   static codes (R1), repetition patterns (R2_1, R2_2), binary-arithmetic
//!   and parity patterns (R2_3), and predictable seeding (R3), producing a
//!   JSON-serializable report.
//! - [`harness`] — a simulated vulnerable OTP server fleet: configurable
//!   weakness profiles, renewal policies, daily quotas, a simulated clock,
//!   and a small HTTP/1.1 API.
//! - [`collector`] — drives a target server to collect OTP sequences with
//!   pacing, budget caps, retries, and the renewal-policy probe matrix.
//! - [`locator`] — a fuzzing-inspired locator that finds login activities in
//!   an abstract app model via name similarity, mutation, and dependency-
//!   graph matching, plus SMS-widget keyword scanning.
//!
//! Shared types are re-exported at the crate root so downstream crates can
//! use one import path.

pub mod collector;
pub mod config;
pub mod harness;
pub mod locator;
pub mod prng;
pub mod recovery;
pub mod rules;

pub use collector::{
    collect, parse_sms, run_renewal_probe, CollectError, CollectOutcome, CollectPlan, DirectTarget,
    HttpTarget, OtpTarget, TargetError, DEFAULT_BUDGET_CAP, DEFAULT_INTERVAL_SECONDS,
};
pub use config::ConfigError;
pub use harness::{
    render_sms, AccountState, Harness, HarnessConfig, HarnessError, HarnessSnapshot, ProfileKind,
    ProfileState, RenewalPolicy, SimClock, DEFAULT_SMS_TEMPLATE,
};
pub use locator::{
    build_dependency_graphs, feedback_optimize, find_sms_widgets, lcs_len, load_app_model,
    load_candidates, locate_login, match_graph, mutate_activity, parse_app_model, parse_candidates,
    select_candidate, sms_otp_activities, Activity, AppModel, Candidate, DependencyGraph, Located,
    LocateOutcome, LocatorConfig, LocatorError, MethodDef, Selection, TestActivity, Widget,
    WidgetMatch, WidgetType, DEFAULT_LCS_THRESH, DEFAULT_MAX_ITERATIONS, DEFAULT_REDUNDANT,
    DEFAULT_WIDGET_KEYWORDS,
};
pub use prng::{
    Algorithm, GeneratorState, LcgParams, LfibOp, LfibParams, OtpLength, OutputTransform,
    PrngError, PrngSpec,
};
pub use recovery::{Recovered, RecoveryError, RecoveryResult};
pub use rules::{
    analyze, classify_renewal_policy, AnalysisConfig, AnalysisReport, Evidence, OtpRecord,
    OtpSequence, ParityPattern, ProbeCell, RenewalClass, RenewalProbeResult, RotationDirection,
    Rule, RuleError, UnclassifiableError, Violation,
};
