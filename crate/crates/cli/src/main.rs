//! `otplint` — one binary over the whole toolkit.
//!
//! Subcommands: `simulate` (print generator output), `serve` (run the
//! simulated OTP server over HTTP), `collect` (pull a code sequence from a
//! server into a file), `analyze` (run the randomness rules over a sequence
//! file), `recover` (state/parameter/seed recovery from observations),
//! `locate` (find the login screen in an app model), and `e2e` (in-process
//! server → collector → analyzer round trip).
//!
//! Exit codes: 0 = success (and, where applicable, nothing found wrong),
//! 1 = findings (rule violations; or nothing located/recovered where the
//! point of the run was to find something), 2 = usage error, 3 = runtime
//! error. The `OTPLINT_SEED` environment variable overrides every seed the
//! tool would otherwise use, for reproducible runs.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use otplint_core::harness::http::serve;
use otplint_core::prng::Algorithm;
use otplint_core::recovery::{
    lcg_recover_params, mt_clone, seed_bruteforce, timestamp_seed_match, Recovered, RecoveryResult,
    DEFAULT_CANDIDATE_CAP, DEFAULT_SEED_SPACE, DEFAULT_TIME_MIN_RUN,
};
use otplint_core::{
    analyze, collect, locate_login, sms_otp_activities, AnalysisConfig, CollectPlan, DirectTarget,
    Harness, HarnessConfig, HttpTarget, LocatorConfig, OtpSequence, OtpTarget, ParityPattern,
    PrngSpec, ProfileKind, RotationDirection, Rule, Violation, DEFAULT_BUDGET_CAP,
    DEFAULT_INTERVAL_SECONDS, DEFAULT_WIDGET_KEYWORDS,
};

/// Seeds are reduced to 24 bits before use so they fit every generator
/// family (the narrowest accepts 31-bit states).
const SEED_MASK: u64 = (1 << 24) - 1;

#[derive(Parser)]
#[command(
    name = "otplint",
    version,
    about = "Audit the randomness of SMS one-time passwords",
    propagate_version = true
)]
struct Cli {
    /// Emit machine-readable JSON instead of human-readable lines.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print generator output for a spec file (raw values, or codes with --codes)
    Simulate {
        /// Generator spec file (`key = value` lines)
        #[arg(long)]
        spec: PathBuf,
        /// How many values to print
        #[arg(long, default_value_t = 10)]
        count: usize,
        /// Print zero-padded OTP codes instead of raw values
        #[arg(long)]
        codes: bool,
    },
    /// Run the simulated OTP server over HTTP until the process is signaled
    Serve {
        /// Server config file (`key = value` lines)
        #[arg(long)]
        config: PathBuf,
        /// TCP port to listen on (0 picks a free port)
        #[arg(long)]
        port: u16,
    },
    /// Collect a code sequence from a running server into a sequence file
    Collect {
        /// Server address, e.g. http://127.0.0.1:8080
        #[arg(long)]
        target: String,
        /// Account to register and query
        #[arg(long)]
        account: String,
        /// Number of codes to collect
        #[arg(long)]
        count: usize,
        /// Output sequence file (tab-separated)
        #[arg(long)]
        out: PathBuf,
        /// Seconds of simulated time between requests
        #[arg(long, default_value_t = DEFAULT_INTERVAL_SECONDS)]
        interval: u64,
        /// Consume (log in with) each collected code
        #[arg(long)]
        consume: bool,
        /// Override the total request budget (default 1000)
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Run the randomness rules over a sequence file; exit 1 iff violations
    Analyze {
        /// Sequence file to analyze
        #[arg(long = "in")]
        input: PathBuf,
        /// Analysis configuration (JSON); defaults apply when omitted
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Recover generator state, parameters, or seeds from observations
    Recover {
        /// What to recover
        #[arg(long, value_enum)]
        mode: RecoverMode,
        /// Observations file (one value/code per line; a sequence file for time-seed)
        #[arg(long = "in")]
        input: PathBuf,
        /// Generator spec file (required for seed-brute and time-seed)
        #[arg(long)]
        template: Option<PathBuf>,
        /// Modulus for lcg-params (decimal or 0x hex)
        #[arg(long, value_parser = parse_integer, default_value = "2147483648")]
        modulus: u64,
        /// Candidate cap for lcg-params
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_CAP)]
        cap: u64,
        /// How many follow-on outputs to predict from a recovered state
        #[arg(long, default_value_t = 10)]
        predict: usize,
        /// First seed of the brute-force range (inclusive)
        #[arg(long, default_value_t = DEFAULT_SEED_SPACE.start)]
        seed_min: u64,
        /// End of the brute-force range (exclusive)
        #[arg(long, default_value_t = DEFAULT_SEED_SPACE.end)]
        seed_max: u64,
        /// Clock-offset window (± seconds) for time-seed
        #[arg(long, default_value_t = 5)]
        window: i64,
        /// Minimum consecutive matches for a time-seed finding
        #[arg(long, default_value_t = DEFAULT_TIME_MIN_RUN)]
        min_run: usize,
    },
    /// Locate the login activity in an app model
    Locate {
        /// App model file (JSON)
        #[arg(long)]
        model: PathBuf,
        /// Candidate flows file (`name(args): fn1,fn2` lines)
        #[arg(long)]
        candidates: PathBuf,
        /// Search iteration cap
        #[arg(long)]
        max_iterations: Option<u32>,
        /// Name-similarity threshold in (0, 1]
        #[arg(long)]
        thresh: Option<f64>,
        /// Search seed (OTPLINT_SEED wins when both are set)
        #[arg(long)]
        seed: Option<u64>,
    },
    /// In-process server → collector → analyzer round trip for one profile
    E2e {
        /// Server weakness profile to exercise
        #[arg(long, value_enum)]
        profile: E2eProfile,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RecoverMode {
    /// Rebuild a full MT19937 state from 624 outputs and predict onward
    MtClone,
    /// Recover LCG multiplier/increment from raw consecutive states
    LcgParams,
    /// Brute-force the seed whose code stream matches the observations
    SeedBrute,
    /// Test per-request timestamp seeding against a recorded sequence
    TimeSeed,
}

#[derive(Clone, Copy, ValueEnum)]
enum E2eProfile {
    #[value(name = "static")]
    Static,
    #[value(name = "fixed_table_624")]
    FixedTable624,
    #[value(name = "repeat_2")]
    Repeat2,
    #[value(name = "repeat_3")]
    Repeat3,
    #[value(name = "repeat_5")]
    Repeat5,
    #[value(name = "rotation")]
    Rotation,
    #[value(name = "append_bit")]
    AppendBit,
    #[value(name = "insert_bit")]
    InsertBit,
    #[value(name = "parity_even")]
    ParityEven,
    #[value(name = "parity_alternating")]
    ParityAlternating,
    #[value(name = "const_seed")]
    ConstSeed,
    #[value(name = "timestamp_seed")]
    TimestampSeed,
    #[value(name = "secure")]
    Secure,
}

/// Clap-compatible decimal-or-`0x`-hex integer parser.
fn parse_integer(text: &str) -> Result<u64, String> {
    otplint_core::config::parse_u64(text).ok_or_else(|| format!("bad integer {text:?}"))
}

fn main() {
    // Die quietly on a closed pipe (`otplint ... | head`) instead of
    // panicking mid-write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    std::process::exit(real_main());
}

fn real_main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let env_seed = match read_env_seed() {
        Ok(seed) => seed,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 2;
        }
    };
    match dispatch(cli, env_seed) {
        Ok(code) => code,
        Err(CmdError::Usage(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CmdError::Runtime(e)) => {
            eprintln!("error: {e:#}");
            3
        }
    }
}

/// Distinguishes "you called it wrong" (exit 2) from "it failed" (exit 3).
enum CmdError {
    Usage(String),
    Runtime(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for CmdError {
    fn from(e: E) -> Self {
        CmdError::Runtime(e.into())
    }
}

fn read_env_seed() -> Result<Option<u64>, String> {
    match std::env::var("OTPLINT_SEED") {
        Ok(text) => otplint_core::config::parse_u64(text.trim())
            .map(Some)
            .ok_or_else(|| format!("OTPLINT_SEED {text:?} is not an integer")),
        Err(_) => Ok(None),
    }
}

fn dispatch(cli: Cli, env_seed: Option<u64>) -> Result<i32, CmdError> {
    let json = cli.json;
    match cli.command {
        Command::Simulate { spec, count, codes } => {
            Ok(cmd_simulate(&spec, count, codes, json, env_seed)?)
        }
        Command::Serve { config, port } => Ok(cmd_serve(&config, port, env_seed)?),
        Command::Collect {
            target,
            account,
            count,
            out,
            interval,
            consume,
            budget,
        } => Ok(cmd_collect(
            &target, &account, count, &out, interval, consume, budget, json,
        )?),
        Command::Analyze { input, config } => Ok(cmd_analyze(&input, config.as_deref(), json)?),
        Command::Recover {
            mode,
            input,
            template,
            modulus,
            cap,
            predict,
            seed_min,
            seed_max,
            window,
            min_run,
        } => cmd_recover(
            mode,
            &input,
            template.as_deref(),
            modulus,
            cap,
            predict,
            seed_min,
            seed_max,
            window,
            min_run,
            json,
        ),
        Command::Locate {
            model,
            candidates,
            max_iterations,
            thresh,
            seed,
        } => Ok(cmd_locate(
            &model,
            &candidates,
            max_iterations,
            thresh,
            seed,
            json,
            env_seed,
        )?),
        Command::E2e { profile } => Ok(cmd_e2e(profile, json, env_seed)?),
    }
}

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

fn cmd_simulate(
    spec_path: &Path,
    count: usize,
    codes: bool,
    json: bool,
    env_seed: Option<u64>,
) -> Result<i32> {
    let mut spec = PrngSpec::from_config_str(&read_file(spec_path)?)
        .with_context(|| format!("parsing {}", spec_path.display()))?;
    if let Some(seed) = env_seed {
        if !matches!(spec.algorithm, Algorithm::OsCsprng) {
            spec = spec.with_seed(seed & SEED_MASK);
        }
    }
    if codes {
        let values = spec.otp_stream(count)?;
        if json {
            println!("{}", json!({ "generator": spec.label(), "codes": values }));
        } else {
            for code in values {
                println!("{code}");
            }
        }
    } else {
        let values = spec.stream(count)?;
        if json {
            println!("{}", json!({ "generator": spec.label(), "values": values }));
        } else {
            for value in values {
                println!("{value}");
            }
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// serve
// ---------------------------------------------------------------------------

/// Replaces every seed the config carries with the override.
fn override_config_seeds(config: &mut HarnessConfig, seed: u64) {
    config.base_seed = seed;
    match &mut config.profile {
        ProfileKind::FixedTable { table, .. } => *table = table.with_seed(seed),
        ProfileKind::ConstSeed { spec } | ProfileKind::TimestampSeed { spec } => {
            *spec = spec.with_seed(seed);
        }
        _ => {}
    }
}

fn cmd_serve(config_path: &Path, port: u16, env_seed: Option<u64>) -> Result<i32> {
    let mut config = HarnessConfig::from_config_str(&read_file(config_path)?)
        .with_context(|| format!("parsing {}", config_path.display()))?;
    if let Some(seed) = env_seed {
        override_config_seeds(&mut config, seed & SEED_MASK);
    }
    let profile = config.profile.label();
    let harness = Arc::new(Harness::new(config)?);
    let server = serve(Arc::clone(&harness), &format!("127.0.0.1:{port}"))
        .with_context(|| format!("binding 127.0.0.1:{port}"))?;
    println!("listening on http://{}", server.addr());
    println!("profile: {profile}");
    loop {
        std::thread::sleep(std::time::Duration::from_secs(3600));
    }
}

// ---------------------------------------------------------------------------
// collect
// ---------------------------------------------------------------------------

#[allow(clippy::too_many_arguments)]
fn cmd_collect(
    target: &str,
    account: &str,
    count: usize,
    out: &Path,
    interval: u64,
    consume: bool,
    budget: Option<usize>,
    json: bool,
) -> Result<i32> {
    let addr = target
        .trim_start_matches("http://")
        .trim_end_matches('/')
        .to_string();
    let mut target = HttpTarget::new(addr);
    let mut plan = CollectPlan::new(account, count);
    plan.interval = interval;
    plan.consume_each = consume;
    if let Some(cap) = budget {
        plan.budget_cap = cap;
    }
    let outcome = collect(&mut target, &plan)?;
    let mut sequence = outcome.sequence;
    sequence.set_source_label(out.display().to_string());
    fs::write(out, sequence.to_file_string()).with_context(|| format!("writing {}", out.display()))?;
    if json {
        println!(
            "{}",
            json!({
                "records": sequence.len(),
                "requests_issued": outcome.requests_issued,
                "notes": outcome.notes,
                "out": out.display().to_string(),
            })
        );
    } else {
        println!(
            "collected {} codes from {} -> {}",
            sequence.len(),
            target.label(),
            out.display()
        );
        for note in &outcome.notes {
            println!("note: {note}");
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

fn load_analysis_config(path: Option<&Path>) -> Result<AnalysisConfig> {
    let config = match path {
        None => AnalysisConfig::default(),
        Some(path) => serde_json::from_str(&read_file(path)?)
            .with_context(|| format!("parsing {}", path.display()))?,
    };
    config.validate()?;
    Ok(config)
}

/// One human-readable line per finding: the rule, its inferred
/// parameters, the record span, and the chance bound.
fn violation_line(v: &Violation) -> String {
    use std::fmt::Write as _;
    let mut line = format!("{} detected", v.rule);
    let e = &v.evidence;
    match v.rule {
        Rule::R1 => {}
        Rule::R2_1 => {
            if let Some(period) = e.period {
                let _ = write!(line, ", N={period}");
            }
        }
        Rule::R2_2 => {
            if let Some(n) = e.repeat_n {
                let _ = write!(line, ", n={n}");
            }
        }
        Rule::R2_3Shift => {
            if let Some(direction) = e.direction {
                let _ = write!(line, ", direction={direction}");
            }
            if let Some(width) = e.width {
                let _ = write!(line, ", width={width}");
            }
        }
        Rule::R2_3Append => {
            if let Some(width) = e.width {
                let _ = write!(line, ", width={width}");
            }
            if let Some(bits) = &e.appended_bits {
                let _ = write!(line, ", bits={bits}");
            }
        }
        Rule::R2_3Insert => {
            if let Some(position) = e.insert_position {
                let _ = write!(line, ", position={position}");
            }
        }
        Rule::R2_3Parity => {
            if let Some(pattern) = e.parity_pattern {
                let _ = write!(line, ", pattern={pattern}");
            }
        }
        Rule::R3ConstSeed => {
            if let Some(template) = &e.template {
                let _ = write!(line, ", template={template}");
            }
            if let Some(seed) = e.seed {
                let _ = write!(line, ", seed={seed}");
            }
        }
        Rule::R3TimeSeed => {
            if let Some(offset) = e.clock_offset {
                let _ = write!(line, ", offset={offset:+}s");
            }
        }
    }
    if !e.confirmed {
        line.push_str(" (unconfirmed)");
    }
    let _ = write!(
        line,
        ", records {}..{}, p<={:.2e}",
        e.start_index, e.end_index, v.chance_probability
    );
    line
}

fn cmd_analyze(input: &Path, config_path: Option<&Path>, json: bool) -> Result<i32> {
    let sequence = OtpSequence::parse(&read_file(input)?, input.display().to_string())
        .with_context(|| format!("parsing {}", input.display()))?;
    let config = load_analysis_config(config_path)?;
    let report = analyze(&sequence, &config);
    if json {
        println!("{}", report.to_json());
    } else {
        println!("source: {}", report.source);
        if report.violations.is_empty() {
            println!("no violations detected");
        }
        for violation in &report.violations {
            println!("{}", violation_line(violation));
        }
        for note in &report.notes {
            println!("note: {note}");
        }
    }
    Ok(i32::from(!report.violations.is_empty()))
}

// ---------------------------------------------------------------------------
// recover
// ---------------------------------------------------------------------------

fn parse_number_lines<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    let mut values = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        values.push(
            line.parse::<T>()
                .map_err(|_| anyhow!("line {}: bad {what} {line:?}", idx + 1))?,
        );
    }
    Ok(values)
}

fn parse_code_lines(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_string)
        .collect()
}

fn load_template(path: Option<&Path>, mode: &str) -> Result<PrngSpec, CmdError> {
    let Some(path) = path else {
        return Err(CmdError::Usage(format!(
            "--template is required for mode {mode}"
        )));
    };
    Ok(PrngSpec::from_config_str(&read_file(path)?)
        .with_context(|| format!("parsing {}", path.display()))?)
}

/// Renders one recovered candidate; a recovered generator state is shown
/// through the outputs it predicts next.
fn candidate_value(candidate: &Recovered, predict: usize) -> Value {
    match candidate {
        Recovered::State(state) => {
            let mut state = state.clone();
            let predicted: Vec<u32> = (0..predict).map(|_| state.next_raw()).collect();
            json!({ "kind": "state", "predicted": predicted })
        }
        Recovered::Seed(seed) => json!({ "kind": "seed", "seed": seed }),
        Recovered::LcgParams { a, c } => json!({ "kind": "lcg_params", "a": a, "c": c }),
        Recovered::ClockOffset {
            offset,
            run_start,
            run_len,
        } => json!({
            "kind": "clock_offset",
            "offset": offset,
            "run_start": run_start,
            "run_len": run_len,
        }),
    }
}

fn print_recovery(result: &RecoveryResult, predict: usize, json: bool) -> i32 {
    if json {
        let candidates: Vec<Value> = result
            .candidates
            .iter()
            .map(|c| candidate_value(c, predict))
            .collect();
        println!(
            "{}",
            json!({
                "trials_examined": result.trials_examined,
                "verification_depth": result.verification_depth,
                "candidates": candidates,
            })
        );
    } else {
        println!("trials examined: {}", result.trials_examined);
        println!("verification depth: {}", result.verification_depth);
        if result.candidates.is_empty() {
            println!("no candidates found");
        }
        for candidate in &result.candidates {
            match candidate {
                Recovered::State(state) => {
                    let mut state = state.clone();
                    let predicted: Vec<String> = (0..predict)
                        .map(|_| state.next_raw().to_string())
                        .collect();
                    println!("state recovered; next {}: {}", predict, predicted.join(" "));
                }
                Recovered::Seed(seed) => println!("seed: {seed}"),
                Recovered::LcgParams { a, c } => println!("a = {a}, c = {c}"),
                Recovered::ClockOffset {
                    offset,
                    run_start,
                    run_len,
                } => println!("offset: {offset:+} s (run of {run_len} from record {run_start})"),
            }
        }
    }
    i32::from(result.candidates.is_empty())
}

#[allow(clippy::too_many_arguments)]
fn cmd_recover(
    mode: RecoverMode,
    input: &Path,
    template: Option<&Path>,
    modulus: u64,
    cap: u64,
    predict: usize,
    seed_min: u64,
    seed_max: u64,
    window: i64,
    min_run: usize,
    json: bool,
) -> Result<i32, CmdError> {
    let text = read_file(input)?;
    let result = match mode {
        RecoverMode::MtClone => {
            let values: Vec<u32> = parse_number_lines(&text, "32-bit output")?;
            if values.len() < 624 {
                return Err(anyhow!(
                    "mt-clone needs 624 consecutive outputs, got {}",
                    values.len()
                )
                .into());
            }
            mt_clone(&values[..624]).context("cloning generator state")?
        }
        RecoverMode::LcgParams => {
            let values: Vec<u64> = parse_number_lines(&text, "raw state")?;
            lcg_recover_params(&values, modulus, cap).context("recovering parameters")?
        }
        RecoverMode::SeedBrute => {
            let spec = load_template(template, "seed-brute")?;
            let codes = parse_code_lines(&text);
            if seed_min >= seed_max {
                return Err(CmdError::Usage(format!(
                    "empty seed range {seed_min}..{seed_max}"
                )));
            }
            seed_bruteforce(&spec, &codes, seed_min..seed_max).context("brute-forcing seeds")?
        }
        RecoverMode::TimeSeed => {
            let spec = load_template(template, "time-seed")?;
            let sequence = OtpSequence::parse(&text, input.display().to_string())
                .with_context(|| format!("parsing {}", input.display()))?;
            let observations: Vec<(u64, String)> = sequence
                .records()
                .iter()
                .map(|r| (r.request_time, r.code.clone()))
                .collect();
            timestamp_seed_match(&spec, &observations, window, min_run)
                .context("matching timestamp seeds")?
        }
    };
    Ok(print_recovery(&result, predict, json))
}

// ---------------------------------------------------------------------------
// locate
// ---------------------------------------------------------------------------

fn cmd_locate(
    model_path: &Path,
    candidates_path: &Path,
    max_iterations: Option<u32>,
    thresh: Option<f64>,
    seed: Option<u64>,
    json: bool,
    env_seed: Option<u64>,
) -> Result<i32> {
    let model = otplint_core::load_app_model(model_path)
        .with_context(|| format!("loading {}", model_path.display()))?;
    let candidates = otplint_core::load_candidates(candidates_path)
        .with_context(|| format!("loading {}", candidates_path.display()))?;
    let mut config = LocatorConfig::default();
    if let Some(cap) = max_iterations {
        config.max_iterations = cap;
    }
    if let Some(thresh) = thresh {
        config.lcs_thresh = thresh;
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(seed) = env_seed {
        config.seed = seed;
    }
    let outcome = locate_login(&model, &candidates, &config)?;
    let keywords: Vec<String> = DEFAULT_WIDGET_KEYWORDS
        .iter()
        .map(|s| s.to_string())
        .collect();
    let screens = sms_otp_activities(&model, &keywords);
    let located = outcome.located.is_some();
    if json {
        let mut value = serde_json::to_value(&outcome)?;
        value
            .as_object_mut()
            .expect("outcome serializes to an object")
            .insert("sms_otp_screens".to_string(), json!(screens));
        println!("{value}");
    } else {
        match &outcome.located {
            Some(found) => {
                println!("located {} (iteration {})", found.activity, found.iterations);
                println!("witness: {}", found.witness.join(" -> "));
            }
            None => println!(
                "no login activity located after {} iterations",
                outcome.iterations_run
            ),
        }
        if screens.is_empty() {
            println!("sms otp screens: none");
        } else {
            println!("sms otp screens: {}", screens.join(", "));
        }
        for warning in &outcome.warnings {
            eprintln!("warning: {warning}");
        }
    }
    Ok(i32::from(!located))
}

// ---------------------------------------------------------------------------
// e2e
// ---------------------------------------------------------------------------

/// Profile recipe: the server to run, how many codes to pull, and the rule
/// the analyzer must report (`None` = must report nothing).
fn e2e_recipe(profile: E2eProfile, seed: u64) -> (ProfileKind, usize, Option<Rule>) {
    match profile {
        E2eProfile::Static => (ProfileKind::StaticPerAccount, 20, Some(Rule::R1)),
        E2eProfile::FixedTable624 => (
            ProfileKind::FixedTable {
                size: 624,
                table: PrngSpec::mt19937(seed),
            },
            1248,
            Some(Rule::R2_1),
        ),
        E2eProfile::Repeat2 => (ProfileKind::RepeatN { n: 2 }, 20, Some(Rule::R2_2)),
        E2eProfile::Repeat3 => (ProfileKind::RepeatN { n: 3 }, 20, Some(Rule::R2_2)),
        E2eProfile::Repeat5 => (ProfileKind::RepeatN { n: 5 }, 20, Some(Rule::R2_2)),
        E2eProfile::Rotation => (
            ProfileKind::Rotation {
                width: 17,
                direction: RotationDirection::Anticlockwise,
            },
            20,
            Some(Rule::R2_3Shift),
        ),
        E2eProfile::AppendBit => (ProfileKind::AppendBit, 20, Some(Rule::R2_3Append)),
        // 14 codes = one full growth run of the insert profile (6 → 19
        // bits before it restarts from a fresh short value).
        E2eProfile::InsertBit => (
            ProfileKind::InsertBit { position: 3 },
            14,
            Some(Rule::R2_3Insert),
        ),
        E2eProfile::ParityEven => (
            ProfileKind::Parity {
                pattern: ParityPattern::AllEven,
            },
            20,
            Some(Rule::R2_3Parity),
        ),
        E2eProfile::ParityAlternating => (
            ProfileKind::Parity {
                pattern: ParityPattern::Alternating,
            },
            20,
            Some(Rule::R2_3Parity),
        ),
        E2eProfile::ConstSeed => (
            ProfileKind::ConstSeed {
                spec: PrngSpec::c_rand(seed),
            },
            1000,
            Some(Rule::R3ConstSeed),
        ),
        E2eProfile::TimestampSeed => (
            ProfileKind::TimestampSeed {
                spec: PrngSpec::c_rand(1),
            },
            12,
            Some(Rule::R3TimeSeed),
        ),
        E2eProfile::Secure => (ProfileKind::Secure, 1000, None),
    }
}

fn cmd_e2e(profile: E2eProfile, json: bool, env_seed: Option<u64>) -> Result<i32> {
    let seed = env_seed.unwrap_or(1) & SEED_MASK;
    let (kind, count, expected) = e2e_recipe(profile, seed);
    let profile_label = kind.label().to_string();

    let mut config = HarnessConfig::new(kind);
    config.daily_quota = None;
    config.base_seed = seed;
    let harness = Arc::new(Harness::new(config)?);
    let mut target = DirectTarget::new(harness);

    let mut plan = CollectPlan::new("probe", count);
    plan.budget_cap = count.max(DEFAULT_BUDGET_CAP);
    let outcome = collect(&mut target, &plan)?;

    let mut analysis = AnalysisConfig::default();
    analysis.max_requests = analysis.max_requests.max(count);
    if matches!(profile, E2eProfile::ConstSeed) {
        analysis.rule3_templates = vec![PrngSpec::c_rand(seed)];
    }
    let report = analyze(&outcome.sequence, &analysis);

    let found: Vec<Rule> = report.violations.iter().map(|v| v.rule).collect();
    match expected {
        None => {
            if !found.is_empty() {
                bail!(
                    "profile {profile_label}: expected no findings, got {:?}",
                    found
                );
            }
            if json {
                println!(
                    "{}",
                    json!({ "profile": profile_label, "expected": Value::Null, "violations": [] })
                );
            } else {
                println!("no violations detected");
            }
        }
        Some(rule) => {
            if found.len() != 1 || found[0] != rule {
                bail!(
                    "profile {profile_label}: expected exactly [{rule}], got {:?} (notes: {:?})",
                    found,
                    report.notes
                );
            }
            if json {
                println!(
                    "{}",
                    json!({
                        "profile": profile_label,
                        "expected": rule.to_string(),
                        "violations": serde_json::to_value(&report.violations)?,
                    })
                );
            } else {
                println!("{}", violation_line(&report.violations[0]));
            }
        }
    }
    Ok(0)
}
