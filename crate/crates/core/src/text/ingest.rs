//! JSON-lines message ingestion.
//!
//! One object per line:
//! `{"id": "...", "created_at": "2020-11-12T14:05:00Z", "user": {"screen_name": "..."}, "text": "...", "retweeted": false}`.
//! `id` may also be a JSON number and `created_at` may use the classic
//! `Wed Nov 11 15:00:00 +0000 2020` form; both are normalized on read.

use std::collections::HashSet;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::RawMessage;

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: invalid UTF-8")]
    InvalidUtf8 { line: usize },
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: empty message id")]
    EmptyId { line: usize },
    #[error("line {line}: duplicate message id {id:?}")]
    DuplicateId { line: usize, id: String },
    #[error("line {line}: unparseable timestamp {value:?}")]
    BadTimestamp { line: usize, value: String },
}

#[derive(Deserialize)]
#[serde(untagged)]
enum IdValue {
    Str(String),
    Num(u64),
}

#[derive(Deserialize, Serialize)]
struct User {
    screen_name: String,
}

#[derive(Deserialize)]
struct InRecord {
    id: IdValue,
    created_at: String,
    user: User,
    #[serde(default)]
    text: String,
    #[serde(default)]
    retweeted: bool,
}

#[derive(Serialize)]
struct OutRecord<'a> {
    id: &'a str,
    created_at: String,
    user: User,
    text: &'a str,
    retweeted: bool,
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.with_timezone(&Utc));
    }
    if let Ok(t) = chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S") {
        return Some(t.and_utc());
    }
    if let Ok(t) = chrono::NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S") {
        return Some(t.and_utc());
    }
    DateTime::parse_from_str(s, "%a %b %d %H:%M:%S %z %Y")
        .ok()
        .map(|t| t.with_timezone(&Utc))
}

/// Parses a JSON-lines byte buffer. Blank lines are ignored.
pub fn parse_messages(bytes: &[u8]) -> Result<Vec<RawMessage>, IngestError> {
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, raw) in bytes.split(|&b| b == b'\n').enumerate() {
        let line = i + 1;
        let text = std::str::from_utf8(raw).map_err(|_| IngestError::InvalidUtf8 { line })?;
        let text = text.trim();
        if text.is_empty() {
            continue;
        }
        let rec: InRecord =
            serde_json::from_str(text).map_err(|source| IngestError::Json { line, source })?;
        let id = match rec.id {
            IdValue::Str(s) => s,
            IdValue::Num(n) => n.to_string(),
        };
        if id.is_empty() {
            return Err(IngestError::EmptyId { line });
        }
        if !seen.insert(id.clone()) {
            return Err(IngestError::DuplicateId { line, id });
        }
        let timestamp = parse_timestamp(&rec.created_at).ok_or_else(|| IngestError::BadTimestamp {
            line,
            value: rec.created_at.clone(),
        })?;
        out.push(RawMessage {
            id,
            timestamp,
            author: rec.user.screen_name,
            text: rec.text,
            is_retweet: rec.retweeted,
        });
    }
    Ok(out)
}

pub fn read_messages(path: impl AsRef<Path>) -> Result<Vec<RawMessage>, IngestError> {
    parse_messages(&fs::read(path)?)
}

/// Writes messages in the canonical form (string ids, RFC 3339 timestamps).
pub fn write_messages<W: Write>(mut w: W, msgs: &[RawMessage]) -> io::Result<()> {
    for m in msgs {
        let rec = OutRecord {
            id: &m.id,
            created_at: m.timestamp.to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
            user: User {
                screen_name: m.author.clone(),
            },
            text: &m.text,
            retweeted: m.is_retweet,
        };
        serde_json::to_writer(&mut w, &rec)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}
