//! Registrable-domain (eTLD+1) computation against a bundled public-suffix
//! snapshot. Matching follows the publicsuffix.org algorithm: exception
//! rules beat wildcards and exact rules, otherwise the longest rule wins,
//! and unknown TLDs fall back to the implicit `*` rule.

use std::collections::HashSet;
use std::net::IpAddr;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const BUNDLED_SNAPSHOT: &str = include_str!("../data/public_suffix_snapshot.dat");

#[derive(Debug, Clone, Default)]
pub struct PublicSuffixList {
    exact: HashSet<String>,
    wildcard: HashSet<String>,
    exception: HashSet<String>,
}

impl PublicSuffixList {
    /// The snapshot compiled into the binary.
    pub fn bundled() -> &'static PublicSuffixList {
        static LIST: OnceLock<PublicSuffixList> = OnceLock::new();
        LIST.get_or_init(|| PublicSuffixList::parse(BUNDLED_SNAPSHOT))
    }

    pub fn parse(text: &str) -> Self {
        let mut list = PublicSuffixList::default();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with("//") {
                continue;
            }
            let rule = line.to_lowercase();
            if let Some(rest) = rule.strip_prefix('!') {
                list.exception.insert(rest.to_string());
            } else if let Some(rest) = rule.strip_prefix("*.") {
                list.wildcard.insert(rest.to_string());
            } else {
                list.exact.insert(rule);
            }
        }
        list
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::parse(&text))
    }

    /// Number of labels in the public suffix of `labels`, or `None` for
    /// hosts that cannot have one (IPs, empty labels).
    fn public_suffix_labels(&self, labels: &[&str]) -> usize {
        let n = labels.len();
        let mut best = 1; // implicit "*" rule
        for start in 0..n {
            let suffix = labels[start..].join(".");
            if self.exception.contains(&suffix) {
                // exception rules win outright; suffix is the rule minus
                // its leftmost label
                return n - start - 1;
            }
            if self.exact.contains(&suffix) {
                best = best.max(n - start);
            }
            if start >= 1 && self.wildcard.contains(&suffix) {
                best = best.max(n - start + 1);
            }
        }
        best
    }

    /// The registrable domain (public suffix plus one label) of a hostname,
    /// lowercased. `None` when the host is an IP literal, is itself a public
    /// suffix, or is otherwise unusable.
    pub fn registrable_domain(&self, host: &str) -> Option<String> {
        let host = host.trim_end_matches('.').to_lowercase();
        if host.is_empty() || host.parse::<IpAddr>().is_ok() {
            return None;
        }
        let labels: Vec<&str> = host.split('.').collect();
        if labels.iter().any(|l| l.is_empty()) {
            return None;
        }
        let ps = self.public_suffix_labels(&labels);
        if ps >= labels.len() {
            return None;
        }
        Some(labels[labels.len() - ps - 1..].join("."))
    }

    /// True when `host` equals `domain` or is a subdomain of it.
    pub fn host_under(&self, host: &str, domain: &str) -> bool {
        let host = host.trim_end_matches('.').to_lowercase();
        let domain = domain.to_lowercase();
        host == domain || host.ends_with(&format!(".{domain}"))
    }
}

/// Registrable domain against the bundled snapshot.
pub fn registrable_domain(host: &str) -> Option<String> {
    PublicSuffixList::bundled().registrable_domain(host)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_domains() {
        assert_eq!(registrable_domain("zerohedge.com").as_deref(), Some("zerohedge.com"));
        assert_eq!(registrable_domain("sub.zerohedge.com").as_deref(), Some("zerohedge.com"));
        assert_eq!(
            registrable_domain("zerohedge.com.evil.org").as_deref(),
            Some("evil.org")
        );
    }

    #[test]
    fn multi_label_suffixes() {
        assert_eq!(registrable_domain("amazon.co.uk").as_deref(), Some("amazon.co.uk"));
        assert_eq!(
            registrable_domain("www.amazon.co.uk").as_deref(),
            Some("amazon.co.uk")
        );
        assert_eq!(registrable_domain("co.uk"), None);
    }

    #[test]
    fn wildcard_and_exception_rules() {
        assert_eq!(registrable_domain("www.ck").as_deref(), Some("www.ck"));
        assert_eq!(registrable_domain("www.www.ck").as_deref(), Some("www.ck"));
        assert_eq!(registrable_domain("test.ck"), None);
        assert_eq!(registrable_domain("b.test.ck").as_deref(), Some("b.test.ck"));
    }

    #[test]
    fn unknown_tld_falls_back_to_star() {
        assert_eq!(
            registrable_domain("truthnews.example").as_deref(),
            Some("truthnews.example")
        );
        assert_eq!(
            registrable_domain("shop.truthnews.example").as_deref(),
            Some("truthnews.example")
        );
    }

    #[test]
    fn ip_literals_and_bare_tlds_have_none() {
        assert_eq!(registrable_domain("127.0.0.1"), None);
        assert_eq!(registrable_domain("com"), None);
        assert_eq!(registrable_domain(""), None);
    }

    #[test]
    fn case_and_trailing_dot() {
        assert_eq!(
            registrable_domain("Sub.ZeroHedge.COM.").as_deref(),
            Some("zerohedge.com")
        );
    }
}
