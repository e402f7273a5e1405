//! Wire-level tests: drive a served harness through raw HTTP/1.1 requests
//! and check status codes and JSON bodies, including the exact error
//! contract (`429 {"error":"quota"}`, `404 {"error":"unknown account"}`).

use std::sync::Arc;

use serde_json::json;

use otplint_core::harness::http::{http_get, http_post, serve, HttpServer};
use otplint_core::{Harness, HarnessConfig, ProfileKind, PrngSpec, RenewalPolicy};

/// Serves a fresh harness on an ephemeral port.
fn spawn(mut config: HarnessConfig) -> (HttpServer, String) {
    config.template = "{code}".to_string();
    let harness = Arc::new(Harness::new(config).unwrap());
    let server = serve(harness, "127.0.0.1:0").unwrap();
    let addr = server.addr().to_string();
    (server, addr)
}

fn register(addr: &str, account: &str) {
    let (status, body) = http_post(
        addr,
        "/accounts",
        &json!({"account_id": account, "phone": "+15550100"}),
    )
    .unwrap();
    assert_eq!(status, 201, "register failed: {body}");
}

fn request_code(addr: &str, account: &str) -> String {
    let (status, body) = http_post(addr, "/otp/request", &json!({ "account_id": account })).unwrap();
    assert_eq!(status, 200, "request failed: {body}");
    body["sms"].as_str().unwrap().to_string()
}

#[test]
fn the_repeat_profile_serves_blocks_over_the_wire() {
    let (_server, addr) = spawn(HarnessConfig::new(ProfileKind::RepeatN { n: 3 }));
    register(&addr, "alice");
    let codes: Vec<String> = (0..6).map(|_| request_code(&addr, "alice")).collect();
    assert_eq!(codes[0], codes[1]);
    assert_eq!(codes[1], codes[2]);
    assert_eq!(codes[3], codes[4]);
    assert_eq!(codes[4], codes[5]);
    assert_ne!(codes[2], codes[3]);
}

#[test]
fn registering_twice_conflicts() {
    let (_server, addr) = spawn(HarnessConfig::new(ProfileKind::Secure));
    register(&addr, "alice");
    let (status, body) = http_post(
        &addr,
        "/accounts",
        &json!({"account_id": "alice", "phone": "+15550100"}),
    )
    .unwrap();
    assert_eq!(status, 409);
    assert_eq!(body, json!({"error": "account exists"}));
}

#[test]
fn unknown_accounts_get_404() {
    let (_server, addr) = spawn(HarnessConfig::new(ProfileKind::Secure));
    let (status, body) = http_post(&addr, "/otp/request", &json!({"account_id": "ghost"})).unwrap();
    assert_eq!(status, 404);
    assert_eq!(body, json!({"error": "unknown account"}));
}

#[test]
fn exhausting_the_quota_returns_429() {
    let (_server, addr) = spawn(HarnessConfig::new(ProfileKind::StaticPerAccount));
    register(&addr, "alice");
    for _ in 0..20 {
        request_code(&addr, "alice");
    }
    let (status, body) = http_post(&addr, "/otp/request", &json!({"account_id": "alice"})).unwrap();
    assert_eq!(status, 429);
    assert_eq!(body, json!({"error": "quota"}));
}

#[test]
fn consume_answers_with_a_json_boolean() {
    let mut config = HarnessConfig::new(ProfileKind::ConstSeed {
        spec: PrngSpec::c_rand(1),
    });
    config.renewal = RenewalPolicy::OnConsume;
    let (_server, addr) = spawn(config);
    register(&addr, "alice");
    let code = request_code(&addr, "alice");

    let (status, body) = http_post(
        &addr,
        "/otp/consume",
        &json!({"account_id": "alice", "code": "999999"}),
    )
    .unwrap();
    assert_eq!(status, 200);
    assert_eq!(body, json!({"valid": false}));

    let (status, body) = http_post(
        &addr,
        "/otp/consume",
        &json!({"account_id": "alice", "code": code}),
    )
    .unwrap();
    assert_eq!(status, 200);
    assert_eq!(body, json!({"valid": true}));

    // Consumed under on_consume: the same code no longer validates.
    let (_, body) = http_post(
        &addr,
        "/otp/consume",
        &json!({"account_id": "alice", "code": code}),
    )
    .unwrap();
    assert_eq!(body, json!({"valid": false}));
}

#[test]
fn the_clock_route_advances_and_validates() {
    let (_server, addr) = spawn(HarnessConfig::new(ProfileKind::Secure));
    let (status, body) = http_post(&addr, "/clock/advance", &json!({"seconds": 0})).unwrap();
    assert_eq!(status, 200);
    let start = body["now"].as_u64().unwrap();

    let (status, body) = http_post(&addr, "/clock/advance", &json!({"seconds": 120})).unwrap();
    assert_eq!(status, 200);
    assert_eq!(body["now"].as_u64().unwrap(), start + 120);

    let (status, body) = http_post(&addr, "/clock/advance", &json!({"seconds": -5})).unwrap();
    assert_eq!(status, 400);
    assert!(body["error"].as_str().unwrap().contains("non-negative"));
}

#[test]
fn the_profile_route_describes_the_server() {
    let (_server, addr) = spawn(HarnessConfig::new(ProfileKind::RepeatN { n: 5 }));
    let (status, body) = http_get(&addr, "/profile").unwrap();
    assert_eq!(status, 200);
    assert_eq!(body["profile"]["kind"], "repeat_n");
    assert_eq!(body["profile"]["n"], 5);
    assert_eq!(body["otp_length"], 6);
    assert_eq!(body["renewal"]["policy"], "per_request");
}

#[test]
fn malformed_bodies_and_routes_are_4xx() {
    let (_server, addr) = spawn(HarnessConfig::new(ProfileKind::Secure));
    let (status, _) = http_post(&addr, "/otp/request", &json!("not an object")).unwrap();
    assert_eq!(status, 400);
    let (status, _) = http_post(&addr, "/otp/request", &json!({})).unwrap();
    assert_eq!(status, 400);
    let (status, body) = http_post(&addr, "/nope", &json!({})).unwrap();
    assert_eq!(status, 404);
    assert_eq!(body, json!({"error": "not found"}));
    let (status, _) = http_get(&addr, "/accounts").unwrap();
    assert_eq!(status, 404);
}

#[test]
fn custom_templates_render_over_the_wire() {
    let mut config = HarnessConfig::new(ProfileKind::StaticPerAccount);
    config.template = "Ref 77: code {code}".to_string();
    let harness = Arc::new(Harness::new(config).unwrap());
    let server = serve(harness, "127.0.0.1:0").unwrap();
    let addr = server.addr().to_string();
    register(&addr, "alice");
    let (status, body) = http_post(&addr, "/otp/request", &json!({"account_id": "alice"})).unwrap();
    assert_eq!(status, 200);
    assert_eq!(body["sms"], "Ref 77: code 266183");
}
