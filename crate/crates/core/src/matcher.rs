//! Match effective URLs against the resource catalog and flag channels that
//! shared at least one catalogued resource.
//!
//! Classification order is fixed (YouTube video, YouTube channel, subreddit,
//! Voat subverse, chan board, website domain); the first hit wins, so
//! per-kind totals stay additive.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::Serialize;

use crate::catalog::{normalize_identifier, ResourceCatalog, ResourceKind};
use crate::error::{Error, Result};
use crate::url::NormalizedUrl;

/// One URL classified against the catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResourceMatch {
    pub kind: ResourceKind,
    pub identifier: String,
}

fn is_youtube_host(host: &str) -> bool {
    matches!(
        host,
        "youtube.com" | "www.youtube.com" | "m.youtube.com" | "music.youtube.com"
    )
}

fn is_reddit_host(host: &str) -> bool {
    matches!(
        host,
        "reddit.com" | "www.reddit.com" | "old.reddit.com" | "new.reddit.com" | "m.reddit.com"
    )
}

fn is_voat_host(host: &str) -> bool {
    matches!(host, "voat.co" | "www.voat.co" | "searchvoat.co")
}

fn is_chan_host(host: &str) -> bool {
    matches!(
        host,
        "8kun.top" | "www.8kun.top" | "8ch.net" | "www.8ch.net" | "8kun.net"
    )
}

/// Video id from the YouTube URL forms we recognize.
fn youtube_video_id(url: &NormalizedUrl) -> Option<String> {
    if url.host == "youtu.be" || url.host == "www.youtu.be" {
        return url.path_segments().first().map(|s| s.to_string());
    }
    if !is_youtube_host(&url.host) {
        return None;
    }
    let segments = url.path_segments();
    match segments.as_slice() {
        ["watch", ..] | ["watch"] => url.query_param("v").filter(|v| !v.is_empty()),
        ["shorts", id, ..] | ["embed", id, ..] | ["v", id, ..] => Some(id.to_string()),
        _ => None,
    }
}

/// Channel identifier (id, custom name, user name, or @handle) from a
/// YouTube URL. Handles match only when the catalog stores that exact form.
fn youtube_channel_id(url: &NormalizedUrl) -> Option<String> {
    if !is_youtube_host(&url.host) {
        return None;
    }
    let segments = url.path_segments();
    match segments.as_slice() {
        ["channel", id, ..] | ["c", id, ..] | ["user", id, ..] => Some(id.to_string()),
        [handle, ..] if handle.starts_with('@') && handle.len() > 1 => Some(handle.to_string()),
        _ => None,
    }
}

/// Classify one effective URL. Deterministic, first classification wins.
pub fn match_url(url: &NormalizedUrl, catalog: &ResourceCatalog) -> Option<ResourceMatch> {
    let lookup = |kind: ResourceKind, raw: &str| -> Option<ResourceMatch> {
        let identifier = normalize_identifier(kind, raw);
        catalog
            .contains(kind, &identifier)
            .then_some(ResourceMatch { kind, identifier })
    };

    if let Some(id) = youtube_video_id(url) {
        if let Some(m) = lookup(ResourceKind::YoutubeVideo, &id) {
            return Some(m);
        }
    }
    if let Some(id) = youtube_channel_id(url) {
        if let Some(m) = lookup(ResourceKind::YoutubeChannel, &id) {
            return Some(m);
        }
    }
    if is_reddit_host(&url.host) {
        if let [r, name, ..] = url.path_segments().as_slice() {
            if *r == "r" {
                if let Some(m) = lookup(ResourceKind::Subreddit, name) {
                    return Some(m);
                }
            }
        }
    }
    if is_voat_host(&url.host) {
        if let [v, name, ..] = url.path_segments().as_slice() {
            if *v == "v" {
                if let Some(m) = lookup(ResourceKind::VoatSubverse, name) {
                    return Some(m);
                }
            }
        }
    }
    if is_chan_host(&url.host) {
        if let Some(board) = url.path_segments().first() {
            if let Some(m) = lookup(ResourceKind::ChanBoard, board) {
                return Some(m);
            }
        }
    }
    if let Some(domain) = url.registrable_domain() {
        if let Some(m) = lookup(ResourceKind::WebsiteDomain, &domain) {
            return Some(m);
        }
    }
    None
}

/// A match joined to its source occurrence.
#[derive(Debug, Clone, Serialize)]
pub struct MatchedOccurrence {
    pub channel_id: i64,
    pub message_id: i64,
    pub effective_url: String,
    pub kind: ResourceKind,
    pub identifier: String,
}

/// Per-kind totals in catalog order.
pub type KindTotals = BTreeMap<ResourceKind, usize>;

/// Classify a whole occurrence set; returns the matches plus per-kind totals.
pub fn match_corpus<'a, I>(occurrences: I, catalog: &ResourceCatalog) -> (Vec<MatchedOccurrence>, KindTotals)
where
    I: IntoIterator<Item = (i64, i64, &'a NormalizedUrl)>,
{
    let mut matches = Vec::new();
    let mut totals: KindTotals = ResourceKind::ALL.iter().map(|k| (*k, 0)).collect();
    for (channel_id, message_id, url) in occurrences {
        if let Some(m) = match_url(url, catalog) {
            *totals.entry(m.kind).or_insert(0) += 1;
            matches.push(MatchedOccurrence {
                channel_id,
                message_id,
                effective_url: url.to_string(),
                kind: m.kind,
                identifier: m.identifier,
            });
        }
    }
    (matches, totals)
}

/// Channels with at least one resource match, with per-kind match counts.
#[derive(Debug, Clone, Default)]
pub struct FlaggedChannelSet {
    pub channel_ids: BTreeSet<i64>,
    pub per_channel_counts: HashMap<i64, KindTotals>,
}

impl FlaggedChannelSet {
    pub fn contains(&self, channel_id: i64) -> bool {
        self.channel_ids.contains(&channel_id)
    }

    pub fn len(&self) -> usize {
        self.channel_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channel_ids.is_empty()
    }
}

pub fn flag_channels(matches: &[MatchedOccurrence]) -> FlaggedChannelSet {
    let mut set = FlaggedChannelSet::default();
    for m in matches {
        set.channel_ids.insert(m.channel_id);
        *set
            .per_channel_counts
            .entry(m.channel_id)
            .or_default()
            .entry(m.kind)
            .or_insert(0) += 1;
    }
    set
}

/// Write `matches.csv`.
pub fn write_matches(matches: &[MatchedOccurrence], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["channel_id", "message_id", "effective_url", "kind", "identifier"])?;
    for m in matches {
        w.write_record([
            m.channel_id.to_string(),
            m.message_id.to_string(),
            m.effective_url.clone(),
            m.kind.to_string(),
            m.identifier.clone(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

pub fn read_matches(path: &Path) -> Result<Vec<MatchedOccurrence>> {
    let mut reader = csv::Reader::from_path(path)?;
    let mut out = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let locator = format!("{}:{}", path.display(), idx + 2);
        let parse_err = |message: String| Error::Parse {
            locator: locator.clone(),
            message,
        };
        out.push(MatchedOccurrence {
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
            effective_url: record.get(2).unwrap_or_default().to_string(),
            kind: ResourceKind::parse(record.get(3).unwrap_or_default())
                .ok_or_else(|| parse_err("bad kind".into()))?,
            identifier: record.get(4).unwrap_or_default().to_string(),
        });
    }
    Ok(out)
}

/// Write per-kind totals (`totals.csv`).
pub fn write_totals(totals: &KindTotals, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["kind", "count"])?;
    for kind in ResourceKind::ALL {
        w.write_record([kind.to_string(), totals.get(&kind).copied().unwrap_or(0).to_string()])?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::url::normalize;

    fn catalog() -> ResourceCatalog {
        let mut c = ResourceCatalog::new();
        c.insert(ResourceKind::YoutubeVideo, "dQw4w9WgXcQ", "t");
        c.insert(ResourceKind::YoutubeChannel, "UCabc", "t");
        c.insert(ResourceKind::YoutubeChannel, "@falcon", "t");
        c.insert(ResourceKind::Subreddit, "conspiracy", "t");
        c.insert(ResourceKind::VoatSubverse, "greatawakening", "t");
        c.insert(ResourceKind::ChanBoard, "qresearch", "t");
        c.insert(ResourceKind::WebsiteDomain, "zerohedge.com", "t");
        c
    }

    fn hit(url: &str) -> Option<ResourceMatch> {
        match_url(&normalize(url).unwrap(), &catalog())
    }

    #[test]
    fn youtube_video_forms() {
        for url in [
            "https://www.youtube.com/watch?v=dQw4w9WgXcQ",
            "https://youtube.com/shorts/dQw4w9WgXcQ",
            "https://youtube.com/embed/dQw4w9WgXcQ?t=1",
            "https://youtu.be/dQw4w9WgXcQ",
        ] {
            let m = hit(url).unwrap_or_else(|| panic!("no match for {url}"));
            assert_eq!(m.kind, ResourceKind::YoutubeVideo);
            assert_eq!(m.identifier, "dQw4w9WgXcQ");
        }
    }

    #[test]
    fn youtube_channel_forms() {
        for url in [
            "https://youtube.com/channel/UCabc",
            "https://www.youtube.com/@falcon",
        ] {
            assert_eq!(hit(url).unwrap().kind, ResourceKind::YoutubeChannel);
        }
        // handle matching is exact-form only
        assert!(hit("https://youtube.com/c/falcon").is_none());
    }

    #[test]
    fn subreddit_and_misses() {
        assert_eq!(
            hit("https://reddit.com/r/Conspiracy/comments/x").unwrap().identifier,
            "conspiracy"
        );
        assert!(hit("https://reddit.com/r/knitting").is_none());
    }

    #[test]
    fn voat_and_chan_boards() {
        assert_eq!(
            hit("https://voat.co/v/GreatAwakening/123").unwrap().kind,
            ResourceKind::VoatSubverse
        );
        assert_eq!(
            hit("https://8kun.top/qresearch/res/1.html").unwrap().kind,
            ResourceKind::ChanBoard
        );
    }

    #[test]
    fn website_domain_uses_registrable_domain() {
        assert_eq!(
            hit("https://www.zerohedge.com/article/x").unwrap().kind,
            ResourceKind::WebsiteDomain
        );
        assert!(hit("https://zerohedge.com.evil.org/x").is_none());
    }

    #[test]
    fn empty_catalog_matches_nothing() {
        let c = ResourceCatalog::new();
        let url = normalize("https://zerohedge.com/a").unwrap();
        assert!(match_url(&url, &c).is_none());
    }

    #[test]
    fn flagging_threshold_is_one_match() {
        let url = normalize("https://reddit.com/r/conspiracy").unwrap();
        let (matches, totals) = match_corpus(vec![(7, 1, &url)], &catalog());
        assert_eq!(totals[&ResourceKind::Subreddit], 1);
        let flagged = flag_channels(&matches);
        assert!(flagged.contains(7));
        assert!(!flagged.contains(8));
    }

    #[test]
    fn rematching_is_stable() {
        let url = normalize("https://youtu.be/dQw4w9WgXcQ").unwrap();
        let first = match_url(&url, &catalog()).unwrap();
        let again = match_url(&url, &catalog()).unwrap();
        assert_eq!(first, again);
    }
}
