//! URL canonicalization.
//!
//! Lowercased scheme and host (IDNA ASCII form), default ports elided,
//! fragments dropped, percent-encoding decoded for unreserved characters
//! and uppercased elsewhere, query kept byte-for-byte in source order.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct NormalizedUrl {
    pub scheme: String,
    pub host: String,
    pub port: Option<u16>,
    pub path: String,
    pub query: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unparseable url {url:?}: {message}")]
pub struct NormalizeError {
    pub url: String,
    pub message: String,
}

/// Canonicalize one extracted URL. `www.`-form inputs get an https scheme.
pub fn normalize(raw_text: &str) -> Result<NormalizedUrl, NormalizeError> {
    let fail = |message: &str| NormalizeError {
        url: raw_text.to_string(),
        message: message.to_string(),
    };

    let with_scheme = if raw_text[..raw_text.len().min(4)].eq_ignore_ascii_case("www.") {
        format!("https://{raw_text}")
    } else {
        raw_text.to_string()
    };

    let parsed = url::Url::parse(&with_scheme).map_err(|e| fail(&e.to_string()))?;
    let host = match parsed.host_str() {
        Some(h) if !h.is_empty() => h.to_lowercase(),
        _ => return Err(fail("empty authority")),
    };
    if !matches!(parsed.scheme(), "http" | "https") {
        return Err(fail("unsupported scheme"));
    }

    Ok(NormalizedUrl {
        scheme: parsed.scheme().to_string(),
        host,
        // the url crate already elides scheme-default ports
        port: parsed.port(),
        path: canonicalize_percent(parsed.path()),
        query: parsed.query().map(str::to_string),
    })
}

impl NormalizedUrl {
    /// Query parameters in source order, percent-decoded.
    pub fn query_pairs(&self) -> Vec<(String, String)> {
        let Some(q) = &self.query else {
            return Vec::new();
        };
        q.split('&')
            .filter(|part| !part.is_empty())
            .map(|part| match part.split_once('=') {
                Some((k, v)) => (percent_decode(k), percent_decode(v)),
                None => (percent_decode(part), String::new()),
            })
            .collect()
    }

    /// First value of a query parameter, if present.
    pub fn query_param(&self, name: &str) -> Option<String> {
        self.query_pairs()
            .into_iter()
            .find(|(k, _)| k == name)
            .map(|(_, v)| v)
    }

    /// Path segments with empties removed.
    pub fn path_segments(&self) -> Vec<&str> {
        self.path.split('/').filter(|s| !s.is_empty()).collect()
    }

    /// Registrable domain of the host against the bundled suffix snapshot.
    pub fn registrable_domain(&self) -> Option<String> {
        crate::domains::registrable_domain(&self.host)
    }
}

impl fmt::Display for NormalizedUrl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}://{}", self.scheme, self.host)?;
        if let Some(port) = self.port {
            write!(f, ":{port}")?;
        }
        f.write_str(&self.path)?;
        if let Some(q) = &self.query {
            write!(f, "?{q}")?;
        }
        Ok(())
    }
}

fn is_unreserved(byte: u8) -> bool {
    byte.is_ascii_alphanumeric() || matches!(byte, b'-' | b'.' | b'_' | b'~')
}

/// Decode unreserved percent triplets and uppercase the hex of the rest.
fn canonicalize_percent(path: &str) -> String {
    let bytes = path.as_bytes();
    let mut out = String::with_capacity(path.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            let hex = &path[i + 1..i + 3];
            if let Ok(value) = u8::from_str_radix(hex, 16) {
                if is_unreserved(value) {
                    out.push(value as char);
                } else {
                    out.push('%');
                    out.push_str(&hex.to_ascii_uppercase());
                }
                i += 3;
                continue;
            }
        }
        // path is ASCII after WHATWG parsing, but stay byte-accurate
        out.push(bytes[i] as char);
        i += 1;
    }
    out
}

fn percent_decode(s: &str) -> String {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' && i + 2 < bytes.len() {
            if let Ok(value) = u8::from_str_radix(&s[i + 1..i + 3], 16) {
                out.push(value);
                i += 3;
                continue;
            }
        }
        out.push(bytes[i]);
        i += 1;
    }
    String::from_utf8_lossy(&out).into_owned()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalizes_case_and_drops_fragment() {
        let n = normalize("HTTPS://Amazon.com/dp/X?tag=a#frag").unwrap();
        assert_eq!(n.scheme, "https");
        assert_eq!(n.host, "amazon.com");
        assert_eq!(n.path, "/dp/X");
        assert_eq!(n.query.as_deref(), Some("tag=a"));
        assert_eq!(n.to_string(), "https://amazon.com/dp/X?tag=a");
    }

    #[test]
    fn www_form_defaults_to_https() {
        let n = normalize("www.example.com/a").unwrap();
        assert_eq!(n.to_string(), "https://www.example.com/a");
    }

    #[test]
    fn default_port_elided() {
        let n = normalize("https://example.com:443/").unwrap();
        assert_eq!(n.port, None);
        assert_eq!(n.to_string(), "https://example.com/");
        let n = normalize("http://example.com:8080/x").unwrap();
        assert_eq!(n.port, Some(8080));
    }

    #[test]
    fn unreserved_percent_triplets_decoded() {
        let n = normalize("https://example.com/%61bc%2F%2f").unwrap();
        assert_eq!(n.path, "/abc%2F%2F");
    }

    #[test]
    fn query_order_and_bytes_preserved() {
        let n = normalize("https://example.com/p?b=2&a=1&a=3").unwrap();
        assert_eq!(n.query.as_deref(), Some("b=2&a=1&a=3"));
        assert_eq!(
            n.query_pairs(),
            vec![
                ("b".into(), "2".into()),
                ("a".into(), "1".into()),
                ("a".into(), "3".into())
            ]
        );
        assert_eq!(n.query_param("a").as_deref(), Some("1"));
    }

    #[test]
    fn query_values_percent_decoded_on_access() {
        let n = normalize("https://example.com/p?tag=chan%2D21").unwrap();
        assert_eq!(n.query_param("tag").as_deref(), Some("chan-21"));
    }

    #[test]
    fn unicode_host_uses_idna_ascii() {
        let n = normalize("https://bücher.example/x").unwrap();
        assert_eq!(n.host, "xn--bcher-kva.example");
    }

    #[test]
    fn unparseable_authority_is_an_error() {
        assert!(normalize("https://").is_err());
        assert!(normalize("ftp://example.com/x").is_err());
    }

    #[test]
    fn idempotent_on_own_output() {
        for input in [
            "HTTPS://Amazon.com:443/dp/%41?tag=a&x=%20#f",
            "www.Example.com/a/../b?q=1",
            "http://example.com",
        ] {
            let once = normalize(input).unwrap();
            let twice = normalize(&once.to_string()).unwrap();
            assert_eq!(once, twice);
        }
    }
}
