//! Tab-separated on-disk format for OTP sequences.
//!
//! One record per line:
//!
//! ```text
//! index<TAB>epoch_seconds<TAB>code<TAB>consumed(0|1)<TAB>account_id
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. The parsed
//! records then pass the usual sequence validation (single account,
//! single code length, non-decreasing times).

use super::{OtpRecord, OtpSequence, RuleError};

fn bad(line: usize, msg: String) -> RuleError {
    RuleError::BadLine { line, msg }
}

pub(super) fn parse(
    text: &str,
    source_label: impl Into<String>,
) -> Result<OtpSequence, RuleError> {
    let mut records = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(bad(
                lineno,
                format!("expected 5 tab-separated fields, found {}", fields.len()),
            ));
        }
        let index = fields[0]
            .parse()
            .map_err(|_| bad(lineno, format!("bad index {:?}", fields[0])))?;
        let request_time = fields[1]
            .parse()
            .map_err(|_| bad(lineno, format!("bad epoch_seconds {:?}", fields[1])))?;
        let consumed = match fields[3] {
            "0" => false,
            "1" => true,
            other => {
                return Err(bad(
                    lineno,
                    format!("bad consumed flag {other:?} (want 0 or 1)"),
                ))
            }
        };
        if fields[4].is_empty() {
            return Err(bad(lineno, "empty account_id".to_string()));
        }
        records.push(OtpRecord {
            index,
            request_time,
            code: fields[2].to_string(),
            consumed,
            account_id: fields[4].to_string(),
        });
    }
    OtpSequence::new(records, source_label)
}

pub(super) fn write(seq: &OtpSequence) -> String {
    let mut out = String::from("# index\tepoch_seconds\tcode\tconsumed\taccount_id\n");
    for r in seq.records() {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            r.index,
            r.request_time,
            r.code,
            u8::from(r.consumed),
            r.account_id
        ));
    }
    out
}
