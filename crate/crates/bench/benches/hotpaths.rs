//! Criterion benchmarks for the hot code paths: state recovery, seed
//! search, sequence analysis, and the string-similarity kernel used by
//! the login-screen locator.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use otplint_core::recovery::{mt_clone, mt_untemper, seed_bruteforce};
use otplint_core::{analyze, lcs_len, AnalysisConfig, OtpRecord, OtpSequence, PrngSpec};

fn sequence_of(codes: Vec<String>) -> OtpSequence {
    let records = codes
        .into_iter()
        .enumerate()
        .map(|(i, code)| OtpRecord {
            index: i as u64,
            request_time: 1_600_000_000 + 60 * i as u64,
            code,
            consumed: false,
            account_id: "bench".to_string(),
        })
        .collect();
    OtpSequence::new(records, "bench").expect("uniform codes")
}

fn bench_untemper(c: &mut Criterion) {
    let outputs = PrngSpec::mt19937(12345).stream(100_000).unwrap();
    let mut group = c.benchmark_group("untemper");
    group.throughput(Throughput::Elements(outputs.len() as u64));
    group.bench_function("100k_words", |b| {
        b.iter(|| {
            let mut acc = 0u32;
            for &word in &outputs {
                acc ^= mt_untemper(black_box(word));
            }
            acc
        });
    });
    group.finish();
}

fn bench_mt_clone(c: &mut Criterion) {
    let outputs = PrngSpec::mt19937(777).stream(624).unwrap();
    c.bench_function("mt_clone_624", |b| {
        b.iter(|| mt_clone(black_box(&outputs)).unwrap());
    });
}

fn bench_seed_brute(c: &mut Criterion) {
    let template = PrngSpec::c_rand(0);
    let observed = PrngSpec::c_rand(60_000).otp_stream(4).unwrap();
    let mut group = c.benchmark_group("seed_bruteforce");
    group.throughput(Throughput::Elements(65_536));
    group.bench_function("64k_seeds", |b| {
        b.iter(|| seed_bruteforce(black_box(&template), black_box(&observed), 0..65_536).unwrap());
    });
    group.finish();
}

fn bench_analyze(c: &mut Criterion) {
    let secure = sequence_of(PrngSpec::mt19937(42).otp_stream(1000).unwrap());
    let weak = sequence_of(PrngSpec::c_rand(1).otp_stream(1000).unwrap());
    let cfg = AnalysisConfig::default();
    let mut group = c.benchmark_group("analyze_1000_codes");
    group.bench_function("secure_sequence", |b| {
        b.iter(|| analyze(black_box(&secure), black_box(&cfg)));
    });
    group.bench_function("constant_seed_sequence", |b| {
        b.iter(|| analyze(black_box(&weak), black_box(&cfg)));
    });
    group.finish();
}

fn bench_lcs(c: &mut Criterion) {
    let pairs = [
        ("SmsLoginActivity", "doSmsLogin"),
        ("checkPhoneNumber", "enterPhoneNumber"),
        ("onRequestPermissionsResult", "requestSmsCode"),
    ];
    c.bench_function("lcs_len_3_pairs", |b| {
        b.iter(|| {
            let mut total = 0usize;
            for (a, s) in pairs {
                total += lcs_len(black_box(a), black_box(s));
            }
            total
        });
    });
}

criterion_group!(
    benches,
    bench_untemper,
    bench_mt_clone,
    bench_seed_brute,
    bench_analyze,
    bench_lcs
);
criterion_main!(benches);
