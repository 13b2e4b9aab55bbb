//! The flagged-resource catalog: web resources (video/channel IDs,
//! subreddits, subverses, boards, domains) that URL matching runs against.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kinds of catalogued resources, in the fixed order matching runs in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResourceKind {
    YoutubeVideo,
    YoutubeChannel,
    Subreddit,
    VoatSubverse,
    ChanBoard,
    WebsiteDomain,
}

impl ResourceKind {
    pub const ALL: [ResourceKind; 6] = [
        ResourceKind::YoutubeVideo,
        ResourceKind::YoutubeChannel,
        ResourceKind::Subreddit,
        ResourceKind::VoatSubverse,
        ResourceKind::ChanBoard,
        ResourceKind::WebsiteDomain,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ResourceKind::YoutubeVideo => "youtube_video",
            ResourceKind::YoutubeChannel => "youtube_channel",
            ResourceKind::Subreddit => "subreddit",
            ResourceKind::VoatSubverse => "voat_subverse",
            ResourceKind::ChanBoard => "chan_board",
            ResourceKind::WebsiteDomain => "website_domain",
        }
    }

    pub fn parse(tag: &str) -> Option<ResourceKind> {
        match tag {
            "youtube_video" => Some(ResourceKind::YoutubeVideo),
            "youtube_channel" => Some(ResourceKind::YoutubeChannel),
            "subreddit" => Some(ResourceKind::Subreddit),
            "voat_subverse" => Some(ResourceKind::VoatSubverse),
            "chan_board" => Some(ResourceKind::ChanBoard),
            "website_domain" => Some(ResourceKind::WebsiteDomain),
            _ => None,
        }
    }

    /// YouTube IDs are case-sensitive; everything else is compared lowercase.
    fn case_sensitive(&self) -> bool {
        matches!(
            self,
            ResourceKind::YoutubeVideo | ResourceKind::YoutubeChannel
        )
    }
}

impl fmt::Display for ResourceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceEntry {
    pub kind: ResourceKind,
    pub identifier: String,
    pub source_label: String,
}

/// Normalize an identifier the same way both at load time and at query time.
pub fn normalize_identifier(kind: ResourceKind, raw: &str) -> String {
    let trimmed = raw.trim();
    let trimmed = match kind {
        ResourceKind::Subreddit => trimmed
            .trim_start_matches('/')
            .trim_start_matches("r/")
            .trim_end_matches('/'),
        ResourceKind::VoatSubverse => trimmed
            .trim_start_matches('/')
            .trim_start_matches("v/")
            .trim_end_matches('/'),
        ResourceKind::ChanBoard => trimmed.trim_matches('/'),
        ResourceKind::WebsiteDomain => {
            let no_scheme = trimmed
                .trim_start_matches("https://")
                .trim_start_matches("http://");
            no_scheme.split('/').next().unwrap_or("").trim_end_matches('.')
        }
        _ => trimmed,
    };
    if kind.case_sensitive() {
        trimmed.to_string()
    } else {
        trimmed.to_lowercase()
    }
}

/// Deduplicated resource entries with exact-match per-kind lookup.
#[derive(Debug, Clone, Default)]
pub struct ResourceCatalog {
    entries: Vec<ResourceEntry>,
    index: BTreeMap<ResourceKind, HashSet<String>>,
}

/// Load summary: per-kind entry counts plus dedup warnings.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CatalogSummary {
    pub counts: BTreeMap<String, usize>,
    pub duplicates_dropped: usize,
}

impl ResourceCatalog {
    pub fn new() -> Self {
        Self::default()
    }

    /// Insert one entry; returns false (and keeps the first copy) on a
    /// duplicate `(kind, identifier)` pair.
    pub fn insert(&mut self, kind: ResourceKind, identifier: &str, source_label: &str) -> bool {
        let identifier = normalize_identifier(kind, identifier);
        if identifier.is_empty() {
            return false;
        }
        let set = self.index.entry(kind).or_default();
        if !set.insert(identifier.clone()) {
            return false;
        }
        self.entries.push(ResourceEntry {
            kind,
            identifier,
            source_label: source_label.to_string(),
        });
        true
    }

    pub fn contains(&self, kind: ResourceKind, identifier: &str) -> bool {
        let identifier = normalize_identifier(kind, identifier);
        self.index
            .get(&kind)
            .map(|set| set.contains(&identifier))
            .unwrap_or(false)
    }

    pub fn entries(&self) -> &[ResourceEntry] {
        &self.entries
    }

    pub fn count(&self, kind: ResourceKind) -> usize {
        self.index.get(&kind).map(|s| s.len()).unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn summary(&self, duplicates_dropped: usize) -> CatalogSummary {
        let mut counts = BTreeMap::new();
        for kind in ResourceKind::ALL {
            counts.insert(kind.as_str().to_string(), self.count(kind));
        }
        CatalogSummary {
            counts,
            duplicates_dropped,
        }
    }
}

/// Load a catalog from a delimited table with columns
/// `kind,identifier,source_label`.
pub fn load_catalog(path: &Path) -> Result<(ResourceCatalog, CatalogSummary)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::Catalog {
            locator: path.display().to_string(),
            message: e.to_string(),
        })?;

    let mut catalog = ResourceCatalog::new();
    let mut duplicates = 0usize;
    for (idx, record) in reader.records().enumerate() {
        let record = record?;
        let locator = format!("{}:{}", path.display(), idx + 2);
        let kind_tag = record.get(0).unwrap_or("").trim();
        let identifier = record.get(1).unwrap_or("").trim();
        let source = record.get(2).unwrap_or("").trim();
        let kind = ResourceKind::parse(kind_tag).ok_or_else(|| Error::Catalog {
            locator: locator.clone(),
            message: format!("unknown kind tag {kind_tag:?}"),
        })?;
        if identifier.is_empty() {
            return Err(Error::Catalog {
                locator,
                message: "empty identifier".into(),
            });
        }
        if !catalog.insert(kind, identifier, source) {
            log::warn!("{locator}: duplicate ({kind}, {identifier}) dropped");
            duplicates += 1;
        }
    }
    let summary = catalog.summary(duplicates);
    Ok((catalog, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write as _;

    fn catalog_file(body: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "kind,identifier,source_label").unwrap();
        write!(f, "{body}").unwrap();
        f
    }

    #[test]
    fn single_subreddit() {
        let f = catalog_file("subreddit,conspiracy,lit\n");
        let (catalog, summary) = load_catalog(f.path()).unwrap();
        assert_eq!(catalog.len(), 1);
        assert!(catalog.contains(ResourceKind::Subreddit, "conspiracy"));
        assert_eq!(summary.counts["subreddit"], 1);
    }

    #[test]
    fn case_normalization_dedupes() {
        let f = catalog_file("subreddit,Conspiracy,a\nsubreddit,conspiracy,b\n");
        let (catalog, summary) = load_catalog(f.path()).unwrap();
        assert_eq!(catalog.len(), 1);
        assert_eq!(summary.duplicates_dropped, 1);
    }

    #[test]
    fn youtube_ids_keep_case() {
        let mut catalog = ResourceCatalog::new();
        assert!(catalog.insert(ResourceKind::YoutubeVideo, "AbCdEf", "x"));
        assert!(catalog.contains(ResourceKind::YoutubeVideo, "AbCdEf"));
        assert!(!catalog.contains(ResourceKind::YoutubeVideo, "abcdef"));
    }

    #[test]
    fn unknown_kind_is_an_error() {
        let f = catalog_file("tiktok_account,whatever,x\n");
        assert!(load_catalog(f.path()).is_err());
    }

    #[test]
    fn website_domain_normalized_to_bare_domain() {
        let mut catalog = ResourceCatalog::new();
        catalog.insert(ResourceKind::WebsiteDomain, "https://ZeroHedge.com/news", "x");
        assert!(catalog.contains(ResourceKind::WebsiteDomain, "zerohedge.com"));
    }

    #[test]
    fn subreddit_prefix_stripped() {
        let mut catalog = ResourceCatalog::new();
        catalog.insert(ResourceKind::Subreddit, "r/Conspiracy", "x");
        assert!(catalog.contains(ResourceKind::Subreddit, "conspiracy"));
    }

    #[test]
    fn lookups_are_total() {
        let catalog = ResourceCatalog::new();
        assert!(!catalog.contains(ResourceKind::ChanBoard, "qresearch"));
    }
}
