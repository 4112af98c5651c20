//! Per-(site, vantage) banner observations: consolidation, text and link counts, cookies.

mod language;

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::domquery::{BannerMatch, DomDocument};
use crate::harvest::{
    is_eu_member, read_matches, read_outcomes, CookieRecord, CrawlOutcome, HarvestError,
    RunManifest,
};

pub use language::{detect_language, STOPWORDS, UNDETERMINED};

/// One measured page. `None` metrics are Unknown.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BannerObservation {
    pub site_domain: String,
    pub tld: String,
    pub vantage_label: String,
    pub vpn_eu: bool,
    pub banner_exists: bool,
    pub height_px: Option<u32>,
    pub word_count: Option<u32>,
    pub link_count: Option<u32>,
    pub language: String,
    pub third_party_persistent_cookies: u32,
    pub match_count: u32,
}

/// Consolidated metrics of one page's matches.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Consolidated {
    pub height_px: Option<u32>,
    pub word_count: Option<u32>,
    pub link_count: Option<u32>,
    pub inner_text: String,
    pub match_count: u32,
}

fn inline_tag(name: &str) -> bool {
    matches!(
        name,
        "a" | "abbr"
            | "b"
            | "bdi"
            | "cite"
            | "code"
            | "em"
            | "font"
            | "i"
            | "label"
            | "mark"
            | "q"
            | "s"
            | "small"
            | "span"
            | "strong"
            | "sub"
            | "sup"
            | "time"
            | "u"
    )
}

fn decode_entity(entity: &str) -> Option<char> {
    match entity {
        "amp" => Some('&'),
        "lt" => Some('<'),
        "gt" => Some('>'),
        "quot" => Some('"'),
        "apos" => Some('\''),
        // Emitted by the serializer for U+00A0.
        "nbsp" => Some('\u{a0}'),
        _ => {
            let num = entity.strip_prefix('#')?;
            let code = match num.strip_prefix(['x', 'X']) {
                Some(hex) => u32::from_str_radix(hex, 16).ok()?,
                None => num.parse().ok()?,
            };
            char::from_u32(code)
        }
    }
}

/// Visible text of an HTML fragment.
///
/// Tags become a space unless inline, script/style content and comments are
/// dropped, and the five XML entities plus numeric references are decoded.
pub fn strip_tags(html: &str) -> String {
    let mut out = String::with_capacity(html.len());
    let mut rest = html;
    while let Some(c) = rest.chars().next() {
        if c == '<' {
            if let Some(after) = rest.strip_prefix("<!--") {
                rest = after.find("-->").map_or("", |i| &after[i + 3..]);
                continue;
            }
            let Some(end) = rest.find('>') else {
                out.push_str(rest);
                break;
            };
            let tag = &rest[1..end];
            let name: String = tag
                .trim_start_matches('/')
                .chars()
                .take_while(|c| c.is_ascii_alphanumeric())
                .collect::<String>()
                .to_ascii_lowercase();
            rest = &rest[end + 1..];
            if !tag.starts_with('/') && matches!(name.as_str(), "script" | "style" | "template") {
                let close = format!("</{name}");
                let lower = rest.to_ascii_lowercase();
                rest = match lower.find(&close) {
                    Some(i) => rest[i..].find('>').map_or("", |j| &rest[i + j + 1..]),
                    None => "",
                };
            }
            if !inline_tag(&name) {
                out.push(' ');
            }
        } else if c == '&' {
            let decoded = rest[1..]
                .find(';')
                .filter(|&i| i <= 10)
                .and_then(|i| decode_entity(&rest[1..1 + i]).map(|ch| (ch, i + 2)));
            match decoded {
                Some((ch, len)) => {
                    out.push(ch);
                    rest = &rest[len..];
                }
                None => {
                    out.push('&');
                    rest = &rest[1..];
                }
            }
        } else {
            out.push(c);
            rest = &rest[c.len_utf8()..];
        }
    }
    out
}

/// Number of maximal non-whitespace runs.
pub fn count_words(text: &str) -> u32 {
    text.split_whitespace().count() as u32
}

/// Links and buttons in a banner subtree, each element counted once.
pub fn count_links(inner_html: &str) -> u32 {
    let doc = DomDocument::parse_fragment(inner_html);
    doc.elements()
        .filter_map(|id| doc.element(id))
        .filter(|e| {
            let role_button = e
                .attr("role")
                .is_some_and(|r| r.trim().eq_ignore_ascii_case("button"));
            let input_button = e.name == "input"
                && e.attr("type").is_some_and(|t| {
                    let t = t.trim();
                    t.eq_ignore_ascii_case("submit") || t.eq_ignore_ascii_case("button")
                });
            (e.name == "a" && e.attr("href").is_some())
                || e.name == "button"
                || input_button
                || role_button
        })
        .count() as u32
}

/// Height of the tallest match; words and links of the match with the longest text.
///
/// Ties on text length break on (words, links, text), so the result does not
/// depend on match order.
pub fn consolidate(matches: &[BannerMatch]) -> Consolidated {
    let height_px = matches.iter().filter_map(|m| m.height_px).max();
    let best = matches
        .iter()
        .map(|m| {
            let text = strip_tags(&m.inner_html);
            let text = text.split_whitespace().collect::<Vec<_>>().join(" ");
            let words = count_words(&text);
            let links = count_links(&m.inner_html);
            (text.chars().count(), words, links, text)
        })
        .max();
    match best {
        Some((_, words, links, text)) => Consolidated {
            height_px,
            word_count: Some(words),
            link_count: Some(links),
            inner_text: text,
            match_count: matches.len() as u32,
        },
        None => Consolidated {
            height_px: None,
            word_count: None,
            link_count: None,
            inner_text: String::new(),
            match_count: 0,
        },
    }
}

/// Public suffix plus one label; the last two labels when the suffix is not listed.
pub fn registrable_domain(host: &str) -> String {
    let host = host
        .trim()
        .trim_end_matches('.')
        .trim_start_matches('.')
        .to_ascii_lowercase();
    if host.parse::<std::net::IpAddr>().is_ok() || !host.contains('.') {
        return host;
    }
    let known = psl::suffix(host.as_bytes()).is_some_and(|s| s.is_known());
    if known {
        if let Some(d) = psl::domain_str(&host) {
            return d.to_string();
        }
        // The host is itself a public suffix.
        return host;
    }
    let labels: Vec<&str> = host.rsplit('.').take(2).collect();
    format!("{}.{}", labels[1], labels[0])
}

/// Persistent cookies whose registrable domain differs from the site's.
pub fn count_third_party_persistent(
    cookies: &[CookieRecord],
    site_domain: &str,
    fetch_time: DateTime<Utc>,
) -> u32 {
    let site = registrable_domain(site_domain);
    cookies
        .iter()
        .filter(|c| c.is_persistent(fetch_time))
        .filter(|c| registrable_domain(&c.cookie_domain) != site)
        .count() as u32
}

/// Observation for a single successful page.
pub fn observe(
    site_domain: &str,
    tld: &str,
    vantage_label: &str,
    vpn_eu: bool,
    matches: &[BannerMatch],
    cookies: &[CookieRecord],
    fetch_time: DateTime<Utc>,
) -> BannerObservation {
    let c = consolidate(matches);
    let banner_exists = c.match_count >= 1;
    BannerObservation {
        site_domain: site_domain.to_string(),
        tld: tld.to_string(),
        vantage_label: vantage_label.to_string(),
        vpn_eu,
        banner_exists,
        height_px: c.height_px,
        word_count: c.word_count,
        link_count: c.link_count,
        language: if banner_exists {
            detect_language(&c.inner_text).to_string()
        } else {
            UNDETERMINED.to_string()
        },
        third_party_persistent_cookies: count_third_party_persistent(
            cookies,
            site_domain,
            fetch_time,
        ),
        match_count: c.match_count,
    }
}

/// Observations for every successful pair of a run, sorted by (vantage, site).
///
/// Failed fetches produce no observation.
pub fn measure_run(run_dir: &Path) -> Result<Vec<BannerObservation>, HarvestError> {
    let manifest = RunManifest::load(run_dir)?;
    let eu: HashMap<&str, bool> = manifest
        .vantages
        .iter()
        .map(|v| (v.label.as_str(), v.eu_member))
        .collect();
    let mut matches: HashMap<(String, String), Vec<BannerMatch>> = HashMap::new();
    for r in read_matches(run_dir)? {
        matches.insert((r.vantage, r.site.domain), r.matches);
    }
    let mut out = Vec::new();
    for rec in read_outcomes(run_dir)? {
        let CrawlOutcome::Success(snap) = &rec.outcome else {
            continue;
        };
        let key = (rec.vantage.clone(), rec.site.domain.clone());
        let m = matches.get(&key).map(Vec::as_slice).unwrap_or(&[]);
        let vpn_eu = eu
            .get(rec.vantage.as_str())
            .copied()
            .unwrap_or_else(|| is_eu_member(&rec.vantage));
        out.push(observe(
            &rec.site.domain,
            &rec.site.tld,
            &rec.vantage,
            vpn_eu,
            m,
            &snap.cookies,
            snap.fetch_time,
        ));
    }
    out.sort_by(|a, b| (&a.vantage_label, &a.site_domain).cmp(&(&b.vantage_label, &b.site_domain)));
    Ok(out)
}

pub fn write_observations(path: &Path, obs: &[BannerObservation]) -> std::io::Result<()> {
    let mut buf = Vec::new();
    for o in obs {
        serde_json::to_writer(&mut buf, o).expect("observation serializes");
        buf.write_all(b"\n")?;
    }
    fs::write(path, buf)
}

pub fn read_observations(path: &Path) -> Result<Vec<BannerObservation>, HarvestError> {
    let text = fs::read_to_string(path).map_err(|e| HarvestError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l)
                .map_err(|e| HarvestError::Record(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domquery::NodeId;

    fn m(height: Option<u32>, html: &str) -> BannerMatch {
        BannerMatch {
            node_id: NodeId(1),
            selector_text: "#c".into(),
            height_px: height,
            width_px: None,
            offset_x: None,
            offset_y: None,
            inner_html: html.into(),
            has_hidden_ancestor_hint: false,
        }
    }

    #[test]
    fn words() {
        assert_eq!(count_words("This website uses cookies"), 4);
        assert_eq!(count_words(""), 0);
        assert_eq!(count_words("  a\tb\n c\u{a0}d "), 4);
    }

    #[test]
    fn strip() {
        assert_eq!(
            strip_tags("We use <b>co</b>okies &amp; more"),
            "We use cookies & more"
        );
        assert_eq!(strip_tags("<p>a</p><p>b</p>").split_whitespace().count(), 2);
        assert_eq!(strip_tags("x<script>var a = '<p>';</script>y"), "x y");
        assert_eq!(strip_tags("&#65;&#x42;&lt;&gt;&quot;&apos;"), "AB<>\"'");
        assert_eq!(strip_tags("a &copy; b & c"), "a &copy; b & c");
        assert_eq!(strip_tags("a<!-- hidden -->b"), "ab");
    }

    #[test]
    fn links() {
        assert_eq!(count_links("<a href='/p'>Policy</a><button>OK</button>"), 2);
        assert_eq!(count_links("<a href='#'><span>ok</span></a>"), 1);
        assert_eq!(
            count_links("<a>anchor</a><input type=text><input type=SUBMIT>"),
            1
        );
        assert_eq!(
            count_links("<a href=/x role=button>x</a><div role=button>y</div>"),
            2
        );
        assert_eq!(
            count_links("<a href='/cookies'>Cookie policy</a> <button>Accept</button> <button>Refuse</button>"),
            3
        );
    }

    #[test]
    fn consolidation_rule() {
        let ms = [
            m(Some(40), "one two three four five"),
            m(Some(120), &"w ".repeat(31)),
            m(Some(80), &"w ".repeat(10)),
        ];
        let c = consolidate(&ms);
        assert_eq!(c.height_px, Some(120));
        assert_eq!(c.word_count, Some(31));
        assert_eq!(c.match_count, 3);
    }

    #[test]
    fn tallest_and_longest_differ() {
        let ms = [
            m(Some(300), "<button>OK</button>"),
            m(
                None,
                "We use cookies to track you. <a href=/p>Policy</a> <a href=/o>Opt out</a>",
            ),
        ];
        let c = consolidate(&ms);
        assert_eq!(c.height_px, Some(300));
        assert_eq!(c.word_count, Some(9));
        assert_eq!(c.link_count, Some(2));
    }

    #[test]
    fn empty_consolidation() {
        let c = consolidate(&[]);
        assert_eq!(c.match_count, 0);
        assert_eq!(c.height_px, None);
        assert_eq!(c.word_count, None);
    }

    #[test]
    fn registrable() {
        assert_eq!(registrable_domain("sub.example.com"), "example.com");
        assert_eq!(registrable_domain("example.com"), "example.com");
        assert_eq!(registrable_domain("www.google.co.uk"), "google.co.uk");
        assert_eq!(registrable_domain(".Tracker.Example."), "tracker.example");
        assert_eq!(
            registrable_domain("a.b.unknownsuffix-zz"),
            "b.unknownsuffix-zz"
        );
        assert_eq!(registrable_domain("127.0.0.1"), "127.0.0.1");
    }

    #[test]
    fn third_party_persistent() {
        let t: DateTime<Utc> = "2019-01-08T10:00:00Z".parse().unwrap();
        let later = Some(t + chrono::Duration::days(30));
        let c = |domain: &str, expires| CookieRecord {
            name: "x".into(),
            cookie_domain: domain.into(),
            path: "/".into(),
            expires,
            set_by_url: format!("http://{domain}/"),
        };
        assert_eq!(
            count_third_party_persistent(&[c("nu.nl", None)], "nu.nl", t),
            0
        );
        assert_eq!(
            count_third_party_persistent(&[c("tracker.example", later)], "nu.nl", t),
            1
        );
        let mixed = [
            c("nu.nl", None),
            c("ads.tracker.example", None),
            c("www.nu.nl", later),
            c("tracker.example", later),
            c("doubleclick.net", later),
            c("sync.adnet.example", later),
        ];
        assert_eq!(count_third_party_persistent(&mixed, "www.nu.nl", t), 3);
    }
}
