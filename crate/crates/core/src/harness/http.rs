//! Minimal HTTP/1.1 JSON front end for a [`Harness`].
//!
//! The wire surface is five routes:
//!
//! | Method | Path             | Body                    | Success          |
//! |--------|------------------|-------------------------|------------------|
//! | POST   | `/accounts`      | `{account_id, phone}`   | 201 echo         |
//! | POST   | `/otp/request`   | `{account_id}`          | 200 `{sms}`      |
//! | POST   | `/otp/consume`   | `{account_id, code}`    | 200 `{valid}`    |
//! | POST   | `/clock/advance` | `{seconds}`             | 200 `{now}`      |
//! | GET    | `/profile`       | —                       | 200 config JSON  |
//!
//! Quota exhaustion answers `429 {"error":"quota"}`; an unknown account
//! `404 {"error":"unknown account"}`; a negative clock delta is a 400.
//! Connections are one-request (`Connection: close`), framed by
//! `Content-Length`. [`http_request`] is the matching client.

use std::io::{self, BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde_json::{json, Value};

use super::{Harness, HarnessError};

/// Largest request body accepted, in bytes.
const MAX_BODY: usize = 1 << 20;
/// Largest request/header line accepted, in bytes.
const MAX_LINE: usize = 8 * 1024;

/// A running HTTP front end. Dropping it stops the accept loop.
pub struct HttpServer {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    accept_thread: Option<JoinHandle<()>>,
}

/// Binds `bind` (e.g. `"127.0.0.1:0"`) and serves `harness` until the
/// returned handle is shut down or dropped.
pub fn serve(harness: Arc<Harness>, bind: &str) -> io::Result<HttpServer> {
    let listener = TcpListener::bind(bind)?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop_flag = Arc::clone(&stop);
    let accept_thread = std::thread::spawn(move || {
        for conn in listener.incoming() {
            if stop_flag.load(Ordering::SeqCst) {
                break;
            }
            let Ok(stream) = conn else { continue };
            let harness = Arc::clone(&harness);
            std::thread::spawn(move || {
                let _ = handle_connection(&harness, stream);
            });
        }
    });
    Ok(HttpServer {
        addr,
        stop,
        accept_thread: Some(accept_thread),
    })
}

impl HttpServer {
    /// The bound address (useful with port 0).
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Stops accepting connections and joins the accept loop.
    pub fn shutdown(&mut self) {
        if let Some(thread) = self.accept_thread.take() {
            self.stop.store(true, Ordering::SeqCst);
            // The accept loop is parked in accept(); poke it awake.
            let _ = TcpStream::connect(self.addr);
            let _ = thread.join();
        }
    }
}

impl Drop for HttpServer {
    fn drop(&mut self) {
        self.shutdown();
    }
}

fn handle_connection(harness: &Harness, mut stream: TcpStream) -> io::Result<()> {
    let (status, body) = match read_request(&mut stream) {
        Ok((method, path, body)) => route(harness, &method, &path, body),
        Err(ReadError::Io(e)) => return Err(e),
        Err(ReadError::Malformed(msg)) => (400, json!({ "error": msg })),
    };
    write_response(&mut stream, status, &body)
}

enum ReadError {
    Io(io::Error),
    Malformed(&'static str),
}

impl From<io::Error> for ReadError {
    fn from(e: io::Error) -> Self {
        ReadError::Io(e)
    }
}

/// Reads one `Content-Length`-framed request; returns method, path, body.
fn read_request(stream: &mut TcpStream) -> Result<(String, String, Vec<u8>), ReadError> {
    let mut reader = BufReader::new(stream);
    let request_line = read_header_line(&mut reader)?;
    let mut parts = request_line.split_whitespace();
    let (Some(method), Some(path)) = (parts.next(), parts.next()) else {
        return Err(ReadError::Malformed("bad request line"));
    };
    let method = method.to_string();
    let path = path.to_string();

    let mut content_length = 0usize;
    loop {
        let line = read_header_line(&mut reader)?;
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.trim().eq_ignore_ascii_case("content-length") {
                content_length = value
                    .trim()
                    .parse()
                    .map_err(|_| ReadError::Malformed("bad content-length"))?;
            }
        }
    }
    if content_length > MAX_BODY {
        return Err(ReadError::Malformed("body too large"));
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;
    Ok((method, path, body))
}

/// One CRLF-terminated line with the terminator stripped.
fn read_header_line(reader: &mut BufReader<&mut TcpStream>) -> Result<String, ReadError> {
    let mut line = String::new();
    reader.read_line(&mut line)?;
    if line.len() > MAX_LINE {
        return Err(ReadError::Malformed("header line too long"));
    }
    while line.ends_with('\r') || line.ends_with('\n') {
        line.pop();
    }
    Ok(line)
}

fn route(harness: &Harness, method: &str, path: &str, body: Vec<u8>) -> (u16, Value) {
    match (method, path) {
        ("POST", "/accounts") => {
            let Some(fields) = parse_body(&body) else {
                return (400, json!({"error": "bad request"}));
            };
            let (Some(account_id), Some(phone)) = (
                fields.get("account_id").and_then(Value::as_str),
                fields.get("phone").and_then(Value::as_str),
            ) else {
                return (400, json!({"error": "account_id and phone are required"}));
            };
            match harness.register(account_id, phone) {
                Ok(()) => (201, json!({ "account_id": account_id, "phone": phone })),
                Err(e) => error_response(&e),
            }
        }
        ("POST", "/otp/request") => {
            let Some(account_id) = string_field(&body, "account_id") else {
                return (400, json!({"error": "account_id is required"}));
            };
            match harness.request_otp(&account_id) {
                Ok(sms) => (200, json!({ "sms": sms })),
                Err(e) => error_response(&e),
            }
        }
        ("POST", "/otp/consume") => {
            let Some(fields) = parse_body(&body) else {
                return (400, json!({"error": "bad request"}));
            };
            let (Some(account_id), Some(code)) = (
                fields.get("account_id").and_then(Value::as_str),
                fields.get("code").and_then(Value::as_str),
            ) else {
                return (400, json!({"error": "account_id and code are required"}));
            };
            match harness.consume(account_id, code) {
                Ok(valid) => (200, json!({ "valid": valid })),
                Err(e) => error_response(&e),
            }
        }
        ("POST", "/clock/advance") => {
            let Some(fields) = parse_body(&body) else {
                return (400, json!({"error": "bad request"}));
            };
            let Some(seconds) = fields.get("seconds").and_then(Value::as_i64) else {
                return (400, json!({"error": "seconds is required"}));
            };
            match harness.advance_clock(seconds) {
                Ok(now) => (200, json!({ "now": now })),
                Err(e) => error_response(&e),
            }
        }
        ("GET", "/profile") => match serde_json::to_value(harness.config()) {
            Ok(config) => (200, config),
            Err(e) => (500, json!({ "error": e.to_string() })),
        },
        _ => (404, json!({"error": "not found"})),
    }
}

fn parse_body(body: &[u8]) -> Option<Value> {
    serde_json::from_slice(body).ok().filter(Value::is_object)
}

fn string_field(body: &[u8], field: &str) -> Option<String> {
    parse_body(body)?
        .get(field)
        .and_then(Value::as_str)
        .map(str::to_string)
}

fn error_response(e: &HarnessError) -> (u16, Value) {
    match e {
        HarnessError::UnknownAccount(_) => (404, json!({"error": "unknown account"})),
        HarnessError::QuotaExceeded => (429, json!({"error": "quota"})),
        HarnessError::AccountExists(_) => (409, json!({"error": "account exists"})),
        HarnessError::EmptyAccountId
        | HarnessError::NegativeClockDelta(_)
        | HarnessError::ClockOverflow => (400, json!({ "error": e.to_string() })),
        other => (500, json!({ "error": other.to_string() })),
    }
}

fn write_response(stream: &mut TcpStream, status: u16, body: &Value) -> io::Result<()> {
    let text = body.to_string();
    let response = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\n\
         Content-Length: {len}\r\nConnection: close\r\n\r\n{text}",
        reason = reason_phrase(status),
        len = text.len(),
    );
    stream.write_all(response.as_bytes())?;
    stream.flush()
}

fn reason_phrase(status: u16) -> &'static str {
    match status {
        200 => "OK",
        201 => "Created",
        400 => "Bad Request",
        404 => "Not Found",
        409 => "Conflict",
        429 => "Too Many Requests",
        500 => "Internal Server Error",
        _ => "Unknown",
    }
}

/// Sends one request to a harness server and returns `(status, body)`.
/// `addr` is `host:port`; a `None` body sends no payload (GET).
pub fn http_request(
    addr: &str,
    method: &str,
    path: &str,
    body: Option<&Value>,
) -> io::Result<(u16, Value)> {
    let mut stream = TcpStream::connect(addr)?;
    let payload = body.map(Value::to_string).unwrap_or_default();
    let request = format!(
        "{method} {path} HTTP/1.1\r\nHost: {addr}\r\nContent-Type: application/json\r\n\
         Content-Length: {len}\r\nConnection: close\r\n\r\n{payload}",
        len = payload.len(),
    );
    stream.write_all(request.as_bytes())?;
    stream.flush()?;

    let mut reader = BufReader::new(&mut stream);
    let mut status_line = String::new();
    reader.read_line(&mut status_line)?;
    let status: u16 = status_line
        .split_whitespace()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "bad status line"))?;

    let mut content_length: Option<usize> = None;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.trim().eq_ignore_ascii_case("content-length") {
                content_length = value.trim().parse().ok();
            }
        }
    }
    let body = match content_length {
        Some(len) => {
            let mut buf = vec![0u8; len];
            reader.read_exact(&mut buf)?;
            buf
        }
        // No explicit framing: the server closes the connection at the end.
        None => {
            let mut buf = Vec::new();
            reader.read_to_end(&mut buf)?;
            buf
        }
    };
    let value = if body.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&body)
            .map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?
    };
    Ok((status, value))
}

/// Convenience POST against a harness server.
pub fn http_post(addr: &str, path: &str, body: &Value) -> io::Result<(u16, Value)> {
    http_request(addr, "POST", path, Some(body))
}

/// Convenience GET against a harness server.
pub fn http_get(addr: &str, path: &str) -> io::Result<(u16, Value)> {
    http_request(addr, "GET", path, None)
}
