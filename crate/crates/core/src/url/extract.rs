//! URL extraction from message text.
//!
//! The grammar is deliberately narrow: `http://` / `https://` URLs plus
//! `www.`-prefixed hosts (scheme assumed https). Bare domains without a
//! scheme or `www.` are not extracted. Trailing sentence punctuation is
//! stripped from each match.

use std::sync::OnceLock;

use regex::Regex;

/// Characters stripped from the end of a match, repeatedly.
const TRAILING_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?', ')', ']', '}', '"', '\''];

/// One URL as matched in a message, with its byte offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrlSpan {
    pub text: String,
    pub byte_offset: usize,
}

/// A `UrlSpan` tagged with its source channel and message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawUrl {
    pub span: UrlSpan,
    pub channel_id: i64,
    pub message_id: i64,
}

fn url_pattern() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    // RFC 3986 character set; anything outside it terminates the match.
    RE.get_or_init(|| {
        Regex::new(r#"(?i)(?:https?://|www\.)[a-z0-9\-._~:/?#\[\]@!$&'()*+,;=%]+"#).unwrap()
    })
}

/// Extract every URL in `text`, non-overlapping, left to right.
pub fn extract_urls(text: &str) -> Vec<UrlSpan> {
    let mut spans = Vec::new();
    for m in url_pattern().find_iter(text) {
        // Reject matches glued to a preceding scheme-ish character, e.g. the
        // "www." inside "nowww.example.com".
        if let Some(prev) = text[..m.start()].chars().next_back() {
            if prev.is_ascii_alphanumeric() || prev == '.' || prev == '-' || prev == '+' {
                continue;
            }
        }
        let stripped = m.as_str().trim_end_matches(TRAILING_PUNCT);
        if !has_authority(stripped) {
            continue;
        }
        spans.push(UrlSpan {
            text: stripped.to_string(),
            byte_offset: m.start(),
        });
    }
    spans
}

/// True when anything usable follows the scheme / `www.` prefix.
fn has_authority(url: &str) -> bool {
    let lower = url.to_ascii_lowercase();
    if let Some(rest) = lower
        .strip_prefix("https://")
        .or_else(|| lower.strip_prefix("http://"))
    {
        !rest.is_empty() && !rest.starts_with(['/', '?', '#'])
    } else if let Some(rest) = lower.strip_prefix("www.") {
        !rest.is_empty()
    } else {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn texts(input: &str) -> Vec<String> {
        extract_urls(input).into_iter().map(|s| s.text).collect()
    }

    #[test]
    fn strips_trailing_punctuation() {
        assert_eq!(texts("see https://bit.ly/abc123."), vec!["https://bit.ly/abc123"]);
        assert_eq!(
            texts("(source: https://example.com/a)!"),
            vec!["https://example.com/a"]
        );
    }

    #[test]
    fn empty_text_yields_nothing() {
        assert!(texts("").is_empty());
        assert!(texts("no links here").is_empty());
    }

    #[test]
    fn www_form_without_scheme() {
        assert_eq!(texts("visit www.example.com/a now"), vec!["www.example.com/a"]);
    }

    #[test]
    fn www_inside_a_word_is_not_a_url() {
        assert!(texts("nowww.example.com").is_empty());
        assert_eq!(texts("x www.example.com"), vec!["www.example.com"]);
    }

    #[test]
    fn scheme_match_swallows_www() {
        assert_eq!(
            texts("https://www.example.com/a"),
            vec!["https://www.example.com/a"]
        );
    }

    #[test]
    fn multiple_urls_left_to_right() {
        let spans = extract_urls("a https://one.example/x b www.two.example/y c");
        assert_eq!(spans.len(), 2);
        assert_eq!(spans[0].text, "https://one.example/x");
        assert_eq!(spans[1].text, "www.two.example/y");
        assert!(spans[0].byte_offset < spans[1].byte_offset);
    }

    #[test]
    fn offsets_point_at_match_start() {
        let text = "go https://x.example/p now";
        let spans = extract_urls(text);
        assert_eq!(&text[spans[0].byte_offset..spans[0].byte_offset + 4], "http");
    }

    #[test]
    fn unicode_terminates_a_match() {
        assert_eq!(texts("link https://x.example/a\u{201d} end"), vec!["https://x.example/a"]);
    }

    #[test]
    fn bare_scheme_is_not_a_url() {
        assert!(texts("https:// and http://").is_empty());
        assert!(texts("www.").is_empty());
    }

    #[test]
    fn query_and_fragment_kept_in_raw_text() {
        assert_eq!(
            texts("https://a.example/p?x=1&y=2#frag,"),
            vec!["https://a.example/p?x=1&y=2#frag"]
        );
    }
}
