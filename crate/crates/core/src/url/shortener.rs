//! Shortener-service detection by host list.

use std::collections::HashSet;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::url::normalize::NormalizedUrl;

const BUNDLED: &str = include_str!("../../data/shorteners.txt");

#[derive(Debug, Clone, Default)]
pub struct ShortenerList {
    hosts: HashSet<String>,
}

impl ShortenerList {
    pub fn bundled() -> &'static ShortenerList {
        static LIST: OnceLock<ShortenerList> = OnceLock::new();
        LIST.get_or_init(|| ShortenerList::parse(BUNDLED))
    }

    pub fn parse(text: &str) -> Self {
        let hosts = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_lowercase)
            .collect();
        ShortenerList { hosts }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(ShortenerList::parse(&text))
    }

    pub fn len(&self) -> usize {
        self.hosts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hosts.is_empty()
    }

    /// True iff the URL's host, or its registrable domain, is on the list.
    pub fn is_shortened(&self, url: &NormalizedUrl) -> bool {
        if self.hosts.contains(&url.host) {
            return true;
        }
        url.registrable_domain()
            .map(|d| self.hosts.contains(&d))
            .unwrap_or(false)
    }
}
