//! Corpus ingestion: line-delimited channel records with embedded messages.
//!
//! One channel object per line so large corpora can be streamed without
//! holding every message in memory at once. Lenient mode skips malformed
//! records and reports them in the load summary; strict mode aborts on the
//! first one.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A broadcast channel: metadata plus its (timestamp-sorted) messages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub channel_id: i64,
    pub username: Option<String>,
    pub title: String,
    pub description: String,
    pub creation_date: DateTime<Utc>,
    pub messages: Vec<MessageRecord>,
}

/// One message; `forwarded_from` carries the origin channel id when the
/// message was forwarded (the origin may be absent from the corpus).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageRecord {
    pub message_id: i64,
    pub timestamp: DateTime<Utc>,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub forwarded_from: Option<i64>,
}

/// Per-load accounting. `parsed + skipped == encountered` always holds,
/// counting each channel line and each embedded message as one record.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct LoadSummary {
    pub channels: usize,
    pub messages: usize,
    pub records_encountered: usize,
    pub records_skipped: usize,
    pub skipped: Vec<String>,
}

impl LoadSummary {
    pub fn records_parsed(&self) -> usize {
        self.channels + self.messages
    }

    fn skip(&mut self, locator: String) {
        log::warn!("skipping record: {locator}");
        self.records_skipped += 1;
        self.skipped.push(locator);
    }
}

/// Loose mirror of the wire format; field-level validation happens after
/// parse so a single bad message does not discard the whole channel.
#[derive(Deserialize)]
struct RawChannel {
    channel_id: Option<i64>,
    username: Option<String>,
    #[serde(default)]
    title: String,
    #[serde(default)]
    description: String,
    creation_date: Option<String>,
    #[serde(default)]
    messages: Vec<RawMessage>,
}

#[derive(Deserialize)]
struct RawMessage {
    message_id: Option<i64>,
    timestamp: Option<String>,
    #[serde(default)]
    text: String,
    #[serde(default)]
    forwarded_from: Option<i64>,
}

fn parse_ts(value: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(value)
        .ok()
        .map(|dt| dt.with_timezone(&Utc))
}

/// Load a corpus from a line-delimited file (or a directory of such files,
/// read in name order). Channels come back sorted by `channel_id` and each
/// channel's messages sorted by `(timestamp, message_id)`.
pub fn load_corpus(path: &Path, strict: bool) -> Result<(Vec<ChannelRecord>, LoadSummary)> {
    let mut summary = LoadSummary::default();
    let mut channels: Vec<ChannelRecord> = Vec::new();
    let mut seen_ids = std::collections::HashSet::new();

    let files: Vec<std::path::PathBuf> = if path.is_dir() {
        let mut entries: Vec<_> = std::fs::read_dir(path)
            .map_err(|e| Error::io(path, e))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file())
            .collect();
        entries.sort();
        entries
    } else {
        vec![path.to_path_buf()]
    };

    for file in &files {
        let reader = BufReader::new(File::open(file).map_err(|e| Error::io(file, e))?);
        for (idx, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(file, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let locator = format!("{}:{}", file.display(), idx + 1);
            summary.records_encountered += 1;
            match parse_channel(&line, &locator, &mut summary, strict)? {
                Some(channel) => {
                    if !seen_ids.insert(channel.channel_id) {
                        return Err(Error::DuplicateChannel(channel.channel_id));
                    }
                    summary.channels += 1;
                    summary.messages += channel.messages.len();
                    channels.push(channel);
                }
                None => summary.skip(locator),
            }
        }
    }

    channels.sort_by_key(|c| c.channel_id);
    Ok((channels, summary))
}

/// Parse one channel line. Returns `Ok(None)` when the line itself is
/// unusable in lenient mode; individual bad messages are skipped in place.
fn parse_channel(
    line: &str,
    locator: &str,
    summary: &mut LoadSummary,
    strict: bool,
) -> Result<Option<ChannelRecord>> {
    let fail = |message: String| -> Result<Option<ChannelRecord>> {
        if strict {
            Err(Error::Corpus {
                locator: locator.to_string(),
                message,
            })
        } else {
            Ok(None)
        }
    };

    let raw: RawChannel = match serde_json::from_str(line) {
        Ok(raw) => raw,
        Err(e) => return fail(format!("invalid record: {e}")),
    };
    let channel_id = match raw.channel_id {
        Some(id) => id,
        None => return fail("missing channel_id".into()),
    };
    let creation_date = match raw.creation_date.as_deref().and_then(parse_ts) {
        Some(ts) => ts,
        None => return fail("missing or malformed creation_date".into()),
    };

    let mut messages = Vec::with_capacity(raw.messages.len());
    let mut seen_message_ids = std::collections::HashSet::with_capacity(raw.messages.len());
    for (midx, msg) in raw.messages.into_iter().enumerate() {
        summary.records_encountered += 1;
        let msg_locator = || format!("{locator} channel {channel_id} message #{midx}");
        let mut bad = |message: String| -> Result<()> {
            if strict {
                Err(Error::Corpus {
                    locator: msg_locator(),
                    message,
                })
            } else {
                summary.skip(format!("{}: {message}", msg_locator()));
                Ok(())
            }
        };

        let message_id = match msg.message_id {
            Some(id) => id,
            None => {
                bad("missing message_id".into())?;
                continue;
            }
        };
        let timestamp = match msg.timestamp.as_deref().and_then(parse_ts) {
            Some(ts) => ts,
            None => {
                bad("missing or malformed timestamp".into())?;
                continue;
            }
        };
        if timestamp < creation_date {
            bad(format!(
                "message {message_id} predates channel creation"
            ))?;
            continue;
        }
        if !seen_message_ids.insert(message_id) {
            bad(format!("duplicate message_id {message_id}"))?;
            continue;
        }
        messages.push(MessageRecord {
            message_id,
            timestamp,
            text: msg.text,
            forwarded_from: msg.forwarded_from,
        });
    }

    messages.sort_by_key(|m| (m.timestamp, m.message_id));
    Ok(Some(ChannelRecord {
        channel_id,
        username: raw.username,
        title: raw.title,
        description: raw.description,
        creation_date,
        messages,
    }))
}

/// Serialize a corpus back to the line-delimited input format.
pub fn write_corpus(channels: &[ChannelRecord], path: &Path) -> Result<()> {
    let mut out = BufWriter::new(File::create(path).map_err(|e| Error::io(path, e))?);
    for channel in channels {
        serde_json::to_writer(&mut out, channel)?;
        out.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn write_lines(lines: &[&str]) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        for line in lines {
            writeln!(f, "{line}").unwrap();
        }
        f
    }

    const CH1: &str = r#"{"channel_id":1,"username":"alpha","title":"Alpha","description":"","creation_date":"2020-01-01T00:00:00Z","messages":[{"message_id":2,"timestamp":"2020-01-03T00:00:00Z","text":"later","forwarded_from":null},{"message_id":1,"timestamp":"2020-01-02T00:00:00Z","text":"first","forwarded_from":2}]}"#;
    const CH2: &str = r#"{"channel_id":2,"username":null,"title":"Beta","description":"d","creation_date":"2020-02-01T00:00:00Z","messages":[{"message_id":1,"timestamp":"2020-02-02T00:00:00Z","text":"hi","forwarded_from":null}]}"#;
    const CH3: &str = r#"{"channel_id":3,"username":null,"title":"Gamma","description":"","creation_date":"2020-03-01T00:00:00Z","messages":[]}"#;

    #[test]
    fn loads_fixture_corpus() {
        let f = write_lines(&[CH1, CH2, CH3]);
        let (channels, summary) = load_corpus(f.path(), false).unwrap();
        assert_eq!(channels.len(), 3);
        assert_eq!(summary.channels, 3);
        assert_eq!(summary.messages, 3);
        assert_eq!(summary.records_skipped, 0);
        assert_eq!(
            summary.records_parsed() + summary.records_skipped,
            summary.records_encountered
        );
        // messages re-sorted by timestamp
        let alpha = &channels[0];
        assert_eq!(alpha.messages[0].message_id, 1);
        assert_eq!(alpha.messages[1].message_id, 2);
    }

    #[test]
    fn message_without_timestamp_is_skipped() {
        let line = r#"{"channel_id":1,"title":"t","description":"","creation_date":"2020-01-01T00:00:00Z","messages":[{"message_id":1,"text":"no ts"},{"message_id":2,"timestamp":"2020-01-02T00:00:00Z","text":"ok"}]}"#;
        let f = write_lines(&[line]);
        let (channels, summary) = load_corpus(f.path(), false).unwrap();
        assert_eq!(summary.records_skipped, 1);
        assert_eq!(channels[0].messages.len(), 1);
        assert_eq!(
            summary.records_parsed() + summary.records_skipped,
            summary.records_encountered
        );
    }

    #[test]
    fn strict_mode_aborts_on_malformed_message() {
        let line = r#"{"channel_id":1,"title":"t","description":"","creation_date":"2020-01-01T00:00:00Z","messages":[{"message_id":1,"text":"no ts"}]}"#;
        let f = write_lines(&[line]);
        assert!(load_corpus(f.path(), true).is_err());
    }

    #[test]
    fn duplicate_channel_id_is_an_error() {
        let f = write_lines(&[CH1, CH1]);
        match load_corpus(f.path(), false) {
            Err(Error::DuplicateChannel(1)) => {}
            other => panic!("expected duplicate channel error, got {other:?}"),
        }
    }

    #[test]
    fn message_predating_creation_is_skipped() {
        let line = r#"{"channel_id":1,"title":"t","description":"","creation_date":"2020-05-01T00:00:00Z","messages":[{"message_id":1,"timestamp":"2020-04-30T23:59:59Z","text":"early"}]}"#;
        let f = write_lines(&[line]);
        let (channels, summary) = load_corpus(f.path(), false).unwrap();
        assert!(channels[0].messages.is_empty());
        assert_eq!(summary.records_skipped, 1);
    }

    #[test]
    fn round_trip_preserves_structure() {
        let f = write_lines(&[CH1, CH2, CH3]);
        let (channels, _) = load_corpus(f.path(), false).unwrap();
        let out = tempfile::NamedTempFile::new().unwrap();
        write_corpus(&channels, out.path()).unwrap();
        let (reloaded, summary) = load_corpus(out.path(), true).unwrap();
        assert_eq!(channels, reloaded);
        assert_eq!(summary.records_skipped, 0);
    }
}
