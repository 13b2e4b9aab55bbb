//! Persistent resolution cache: an append-only log of resolution outcomes
//! keyed by normalized URL, so reruns are network-free and auditable.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::url::resolve::{ResolutionOutcome, ResolutionStatus};

#[derive(Debug, Serialize, Deserialize)]
struct CacheRecord {
    normalized_url: String,
    status: ResolutionStatus,
    final_url: Option<String>,
    redirect_count: u32,
    fetched_at: DateTime<Utc>,
}

pub struct ResolutionCache {
    path: PathBuf,
    entries: HashMap<String, ResolutionOutcome>,
    writer: BufWriter<File>,
}

impl ResolutionCache {
    /// Open (or create) a cache file. A corrupt file is rebuilt from empty
    /// with a warning rather than failing the run.
    pub fn open(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent() {
            if !parent.as_os_str().is_empty() {
                std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
            }
        }
        let mut entries = HashMap::new();
        let mut corrupt = false;
        if path.exists() {
            let reader = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
            for line in reader.lines() {
                let line = line.map_err(|e| Error::io(path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<CacheRecord>(&line) {
                    Ok(rec) => {
                        entries.insert(
                            rec.normalized_url,
                            ResolutionOutcome {
                                status: rec.status,
                                final_url: rec.final_url.and_then(|u| {
                                    crate::url::normalize::normalize(&u).ok()
                                }),
                                redirect_count: rec.redirect_count,
                                fetched_at: rec.fetched_at,
                            },
                        );
                    }
                    Err(e) => {
                        log::warn!(
                            "resolution cache {} is corrupt ({e}); rebuilding from empty",
                            path.display()
                        );
                        corrupt = true;
                        break;
                    }
                }
            }
        }
        if corrupt {
            entries.clear();
        }
        let writer = BufWriter::new(
            OpenOptions::new()
                .create(true)
                .append(!corrupt)
                .write(true)
                .truncate(corrupt)
                .open(path)
                .map_err(|e| Error::io(path, e))?,
        );
        Ok(ResolutionCache {
            path: path.to_path_buf(),
            entries,
            writer,
        })
    }

    pub fn get(&self, normalized_url: &str) -> Option<&ResolutionOutcome> {
        self.entries.get(normalized_url)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Record an outcome and append it to the log.
    pub fn insert(&mut self, normalized_url: String, outcome: ResolutionOutcome) -> Result<()> {
        let record = CacheRecord {
            normalized_url: normalized_url.clone(),
            status: outcome.status,
            final_url: outcome.final_url.as_ref().map(|u| u.to_string()),
            redirect_count: outcome.redirect_count,
            fetched_at: outcome.fetched_at,
        };
        serde_json::to_writer(&mut self.writer, &record)?;
        self.writer
            .write_all(b"\n")
            .map_err(|e| Error::io(&self.path, e))?;
        self.entries.insert(normalized_url, outcome);
        Ok(())
    }

    pub fn flush(&mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(status: ResolutionStatus) -> ResolutionOutcome {
        ResolutionOutcome {
            status,
            final_url: None,
            redirect_count: 0,
            fetched_at: Utc::now(),
        }
    }

    #[test]
    fn persists_across_reopen() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        {
            let mut cache = ResolutionCache::open(&path).unwrap();
            cache
                .insert("https://bit.ly/x".into(), outcome(ResolutionStatus::FailedStatus))
                .unwrap();
            cache.flush().unwrap();
        }
        let cache = ResolutionCache::open(&path).unwrap();
        assert_eq!(cache.len(), 1);
        assert!(cache.get("https://bit.ly/x").is_some());
    }

    #[test]
    fn corrupt_cache_rebuilds_empty() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.jsonl");
        std::fs::write(&path, "this is not json\n").unwrap();
        let cache = ResolutionCache::open(&path).unwrap();
        assert!(cache.is_empty());
    }
}
