//! URL engine: extraction, normalization, shortener resolution, and the
//! per-occurrence bookkeeping every downstream matcher consumes.

pub mod cache;
pub mod extract;
pub mod normalize;
pub mod resolve;
pub mod shortener;

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::corpus::ChannelRecord;
use crate::error::{Error, Result};

pub use cache::ResolutionCache;
pub use extract::{extract_urls, RawUrl, UrlSpan};
pub use normalize::{normalize, NormalizedUrl};
pub use resolve::{ResolutionOutcome, ResolutionPolicy, ResolutionStatus, Resolver};
pub use shortener::ShortenerList;

/// One URL sighting: the raw match, its normalized form, the resolution
/// outcome, and the effective URL all downstream matchers use.
#[derive(Debug, Clone)]
pub struct UrlOccurrence {
    pub raw: RawUrl,
    pub normalized: NormalizedUrl,
    pub resolution: ResolutionOutcome,
    /// `final_url` when resolved, the normalized form otherwise.
    pub effective: NormalizedUrl,
}

impl UrlOccurrence {
    fn new(raw: RawUrl, normalized: NormalizedUrl) -> Self {
        UrlOccurrence {
            effective: normalized.clone(),
            normalized,
            raw,
            resolution: ResolutionOutcome::not_shortened(),
        }
    }

    fn apply(&mut self, outcome: ResolutionOutcome) {
        self.effective = match (&outcome.status, &outcome.final_url) {
            (ResolutionStatus::Resolved, Some(final_url)) => final_url.clone(),
            _ => self.normalized.clone(),
        };
        self.resolution = outcome;
    }
}

/// Extract and normalize every URL in a corpus. Unparseable matches are
/// dropped with a log entry and counted.
pub fn extract_corpus_urls(channels: &[ChannelRecord]) -> (Vec<UrlOccurrence>, usize) {
    let mut occurrences = Vec::new();
    let mut dropped = 0usize;
    for channel in channels {
        for message in &channel.messages {
            for span in extract_urls(&message.text) {
                match normalize(&span.text) {
                    Ok(normalized) => occurrences.push(UrlOccurrence::new(
                        RawUrl {
                            span,
                            channel_id: channel.channel_id,
                            message_id: message.message_id,
                        },
                        normalized,
                    )),
                    Err(e) => {
                        log::debug!("dropping occurrence: {e}");
                        dropped += 1;
                    }
                }
            }
        }
    }
    (occurrences, dropped)
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct ResolveStats {
    pub occurrences: usize,
    pub shortened_occurrences: usize,
    pub unique_shortened: usize,
    pub cache_hits: usize,
    pub network_resolutions: usize,
}

impl ResolveStats {
    pub fn cache_hit_rate(&self) -> f64 {
        if self.unique_shortened == 0 {
            return 1.0;
        }
        self.cache_hits as f64 / self.unique_shortened as f64
    }
}

/// Resolve every shortened occurrence, at most once per unique URL per run;
/// everything else passes through as `not_shortened`.
pub fn resolve_all(
    occurrences: &mut [UrlOccurrence],
    cache: &mut ResolutionCache,
    resolver: &Resolver,
    shorteners: &ShortenerList,
) -> Result<ResolveStats> {
    let mut stats = ResolveStats {
        occurrences: occurrences.len(),
        ..Default::default()
    };

    // Deterministic resolution order regardless of occurrence order.
    let mut pending: BTreeMap<String, NormalizedUrl> = BTreeMap::new();
    let mut unique: std::collections::HashSet<String> = std::collections::HashSet::new();
    for occ in occurrences.iter() {
        if shorteners.is_shortened(&occ.normalized) {
            stats.shortened_occurrences += 1;
            let key = occ.normalized.to_string();
            if cache.get(&key).is_none() && !pending.contains_key(&key) {
                pending.insert(key.clone(), occ.normalized.clone());
            }
            unique.insert(key);
        }
    }

    stats.unique_shortened = unique.len();
    stats.cache_hits = stats.unique_shortened - pending.len();
    stats.network_resolutions = pending.len();

    let outcomes = resolver.resolve_batch(pending.into_values().collect());
    if !resolver.policy().no_network {
        for (key, outcome) in &outcomes {
            cache.insert(key.clone(), outcome.clone())?;
        }
        cache.flush()?;
    }

    for occ in occurrences.iter_mut() {
        if shorteners.is_shortened(&occ.normalized) {
            let key = occ.normalized.to_string();
            let outcome = cache
                .get(&key)
                .cloned()
                .or_else(|| outcomes.get(&key).cloned())
                .unwrap_or_else(|| {
                    ResolutionOutcome {
                        status: ResolutionStatus::FailedNetwork,
                        final_url: None,
                        redirect_count: 0,
                        fetched_at: chrono::Utc::now(),
                    }
                });
            occ.apply(outcome);
        } else {
            occ.apply(ResolutionOutcome::not_shortened());
        }
    }
    Ok(stats)
}

/// Write `urls.csv` (channel_id, message_id, raw, effective, status).
pub fn write_occurrences(occurrences: &[UrlOccurrence], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["channel_id", "message_id", "raw", "effective", "status"])?;
    for occ in occurrences {
        w.write_record([
            occ.raw.channel_id.to_string(),
            occ.raw.message_id.to_string(),
            occ.raw.span.text.clone(),
            occ.effective.to_string(),
            occ.resolution.status.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

/// A row read back from `urls.csv`.
#[derive(Debug, Clone)]
pub struct UrlRow {
    pub channel_id: i64,
    pub message_id: i64,
    pub raw: String,
    pub effective: NormalizedUrl,
    pub status: ResolutionStatus,
}

pub fn read_occurrences(path: &Path) -> Result<Vec<UrlRow>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let locator = format!("{}:{}", path.display(), idx + 2);
        let parse_err = |message: String| Error::Parse {
            locator: locator.clone(),
            message,
        };
        let effective = normalize(record.get(3).unwrap_or_default())
            .map_err(|e| parse_err(e.to_string()))?;
        rows.push(UrlRow {
            channel_id: record
                .get(0)
                .unwrap_or_default()
                .parse()
                .map_err(|e| parse_err(format!("channel_id: {e}")))?,
            message_id: record
                .get(1)
                .unwrap_or_default()
                .parse()
                .map_err(|e| parse_err(format!("message_id: {e}")))?,
            raw: record.get(2).unwrap_or_default().to_string(),
            effective,
            status: ResolutionStatus::parse(record.get(4).unwrap_or_default())
                .ok_or_else(|| parse_err("bad status".into()))?,
        });
    }
    Ok(rows)
}
