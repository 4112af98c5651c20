//! Static HTTP page fetching with manual redirect following and a per-pair cookie jar.

use std::io::Read;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Duration;

use chrono::{DateTime, TimeZone, Utc};
use reqwest::blocking::Client;
use reqwest::header::{ACCEPT, ACCEPT_LANGUAGE, CONTENT_TYPE, COOKIE, LOCATION, SET_COOKIE};
use url::Url;

use super::records::{CookieRecord, CrawlOutcome, FailureKind, PageSnapshot, SiteEntry};
use super::vantage::VantagePoint;
use crate::domquery::LayoutProvider;

pub const DEFAULT_SCHEMES: [&str; 4] = ["https", "http", "https://www.", "http://www."];
pub const DEFAULT_BODY_CAP: usize = 5 * 1024 * 1024;
pub const DEFAULT_USER_AGENT: &str =
    "Mozilla/5.0 (X11; Linux x86_64; rv:64.0) Gecko/20100101 Firefox/64.0";

#[derive(Debug, Clone, PartialEq)]
pub struct FetchPolicy {
    pub timeout: Duration,
    pub max_redirects: u32,
    pub user_agent: String,
    /// Tried in order; the next variant is used only after a transport failure.
    pub schemes: Vec<String>,
    pub body_cap_bytes: usize,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        FetchPolicy {
            timeout: Duration::from_secs(30),
            max_redirects: 10,
            user_agent: DEFAULT_USER_AGENT.to_string(),
            schemes: DEFAULT_SCHEMES.iter().map(|s| s.to_string()).collect(),
            body_cap_bytes: DEFAULT_BODY_CAP,
        }
    }
}

/// Start URL for `domain` under one scheme template (`https`, `http://www.`, ...).
pub fn candidate_url(template: &str, domain: &str) -> String {
    if template.contains("://") {
        let prefix = template.split("://").nth(1).unwrap_or("");
        if !prefix.is_empty() && domain.starts_with(prefix) {
            format!(
                "{}://{domain}/",
                template.split("://").next().unwrap_or("http")
            )
        } else {
            format!("{template}{domain}/")
        }
    } else {
        format!("{template}://{domain}/")
    }
}

/// Raw observations from one attempt, before classification.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureEvidence {
    /// Transport error; `message` is the lowercased source chain.
    Transport {
        message: String,
        timed_out: bool,
    },
    TooManyRedirects(u32),
    /// Final, post-redirect response.
    Response {
        status: u16,
        body_len: usize,
    },
    Panic(String),
}

const DNS_MARKERS: [&str; 6] = [
    "dns error",
    "failed to lookup address",
    "name or service not known",
    "nxdomain",
    "no such host",
    "nodename nor servname",
];
const TLS_MARKERS: [&str; 5] = ["certificate", "tls", "ssl", "handshake", "invalidcert"];

/// Failure kind for the evidence, or `None` when it describes a usable page.
pub fn classify_failure(evidence: &FailureEvidence) -> Option<FailureKind> {
    match evidence {
        FailureEvidence::Transport { message, timed_out } => {
            let m = message.to_ascii_lowercase();
            Some(if DNS_MARKERS.iter().any(|p| m.contains(p)) {
                FailureKind::DnsFailure
            } else if TLS_MARKERS.iter().any(|p| m.contains(p)) {
                FailureKind::TlsFailure
            } else if *timed_out || m.contains("timed out") || m.contains("timeout") {
                FailureKind::Timeout
            } else {
                FailureKind::ConnectFailure
            })
        }
        FailureEvidence::TooManyRedirects(_) => Some(FailureKind::ConnectFailure),
        FailureEvidence::Response { status, body_len } => {
            if (400..=599).contains(status) {
                Some(FailureKind::HttpError(*status))
            } else if *status >= 600 {
                Some(FailureKind::ConnectFailure)
            } else if *body_len == 0 && (200..300).contains(status) {
                Some(FailureKind::EmptyBody)
            } else {
                None
            }
        }
        FailureEvidence::Panic(_) => Some(FailureKind::InternalCrash),
    }
}

fn error_chain(e: &reqwest::Error) -> String {
    // The top-level message embeds the URL, which must not drive classification.
    let mut parts = Vec::new();
    let mut src = std::error::Error::source(e);
    while let Some(s) = src {
        parts.push(s.to_string());
        src = s.source();
    }
    if parts.is_empty() {
        parts.push(e.to_string());
    }
    parts.join(": ")
}

fn transport(e: &reqwest::Error) -> FailureEvidence {
    FailureEvidence::Transport {
        message: error_chain(e),
        timed_out: e.is_timeout(),
    }
}

/// One cookie held between requests of a single page load.
#[derive(Debug, Clone)]
struct JarCookie {
    name: String,
    value: String,
    domain: String,
    host_only: bool,
    path: String,
    expires: Option<DateTime<Utc>>,
}

/// Cookie jar scoped to one (site, vantage) pair.
#[derive(Debug, Default)]
struct Jar {
    cookies: Vec<JarCookie>,
    records: Vec<CookieRecord>,
}

fn default_path(url: &Url) -> String {
    let p = url.path();
    match p.rfind('/') {
        Some(0) | None => "/".to_string(),
        Some(i) => p[..i].to_string(),
    }
}

fn host_of(url: &Url) -> String {
    url.host_str().unwrap_or("").to_ascii_lowercase()
}

impl Jar {
    fn header_for(&self, url: &Url, now: DateTime<Utc>) -> Option<String> {
        let host = host_of(url);
        let path = url.path();
        let pairs: Vec<String> = self
            .cookies
            .iter()
            .filter(|c| c.expires.is_none_or(|e| e > now))
            .filter(|c| {
                if c.host_only {
                    host == c.domain
                } else {
                    host == c.domain || host.ends_with(&format!(".{}", c.domain))
                }
            })
            .filter(|c| path.starts_with(&c.path))
            .map(|c| format!("{}={}", c.name, c.value))
            .collect();
        (!pairs.is_empty()).then(|| pairs.join("; "))
    }

    fn store(&mut self, header: &str, url: &Url, now: DateTime<Utc>) {
        let Ok(c) = cookie::Cookie::parse(header.to_string()) else {
            return;
        };
        let host = host_of(url);
        let (domain, host_only) = match c.domain() {
            Some(d) if !d.trim_start_matches('.').is_empty() => {
                let d = d.trim_start_matches('.').to_ascii_lowercase();
                if host != d && !host.ends_with(&format!(".{d}")) {
                    log::debug!("rejecting cookie {} for {d} set by {host}", c.name());
                    return;
                }
                (d, false)
            }
            _ => (host, true),
        };
        let path = c
            .path()
            .filter(|p| p.starts_with('/'))
            .map(str::to_string)
            .unwrap_or_else(|| default_path(url));
        let expires = if let Some(age) = c.max_age() {
            Some(now + chrono::Duration::seconds(age.whole_seconds()))
        } else {
            c.expires_datetime()
                .and_then(|t| Utc.timestamp_opt(t.unix_timestamp(), 0).single())
        };
        let key = |n: &str, d: &str, p: &str| (n.to_string(), d.to_string(), p.to_string());
        let k = key(c.name(), &domain, &path);
        self.cookies
            .retain(|j| key(&j.name, &j.domain, &j.path) != k);
        self.records
            .retain(|r| key(&r.name, &r.cookie_domain, &r.path) != k);
        self.cookies.push(JarCookie {
            name: c.name().to_string(),
            value: c.value().to_string(),
            domain: domain.clone(),
            host_only,
            path: path.clone(),
            expires,
        });
        self.records.push(CookieRecord {
            name: c.name().to_string(),
            cookie_domain: domain,
            path,
            expires,
            set_by_url: url.to_string(),
        });
    }
}

#[allow(clippy::result_large_err)]
fn build_client(vantage: &VantagePoint, policy: &FetchPolicy) -> Result<Client, CrawlOutcome> {
    let mut b = Client::builder()
        .redirect(reqwest::redirect::Policy::none())
        .timeout(policy.timeout)
        .user_agent(policy.user_agent.clone());
    b = match &vantage.proxy_url {
        Some(p) => {
            let proxy = reqwest::Proxy::all(p).map_err(|e| {
                CrawlOutcome::failure(
                    FailureKind::ConnectFailure,
                    format!("invalid proxy {p}: {e}"),
                )
            })?;
            b.proxy(proxy)
        }
        None => b.no_proxy(),
    };
    b.build()
        .map_err(|e| CrawlOutcome::failure(FailureKind::InternalCrash, e.to_string()))
}

enum Attempt {
    Done(CrawlOutcome),
    Failed(FailureKind, String),
}

fn attempt(
    client: &Client,
    start: &str,
    site: &SiteEntry,
    vantage: &VantagePoint,
    policy: &FetchPolicy,
) -> Attempt {
    let fetch_time = Utc::now();
    let fail = |ev: FailureEvidence, detail: String| {
        let kind = classify_failure(&ev).unwrap_or(FailureKind::InternalCrash);
        Attempt::Failed(kind, detail)
    };
    let mut url = match Url::parse(start) {
        Ok(u) => u,
        Err(e) => return Attempt::Failed(FailureKind::DnsFailure, format!("{start}: {e}")),
    };
    let mut jar = Jar::default();
    let mut chain = vec![url.to_string()];
    let mut redirects = 0u32;
    loop {
        let mut req = client
            .get(url.clone())
            .header(
                ACCEPT,
                "text/html,application/xhtml+xml,application/xml;q=0.9,*/*;q=0.8",
            )
            .header(ACCEPT_LANGUAGE, vantage.accept_language.as_str());
        if let Some(c) = jar.header_for(&url, Utc::now()) {
            req = req.header(COOKIE, c);
        }
        let resp = match req.send() {
            Ok(r) => r,
            Err(e) => {
                let ev = transport(&e);
                return fail(ev, format!("{url}: {}", error_chain(&e)));
            }
        };
        for v in resp.headers().get_all(SET_COOKIE) {
            if let Ok(s) = v.to_str() {
                jar.store(s, &url, fetch_time);
            }
        }
        let status = resp.status().as_u16();
        let location = resp
            .headers()
            .get(LOCATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|l| url.join(l).ok());
        if resp.status().is_redirection() {
            if let Some(next) = location {
                if redirects >= policy.max_redirects {
                    return fail(
                        FailureEvidence::TooManyRedirects(redirects),
                        format!("more than {} redirects", policy.max_redirects),
                    );
                }
                redirects += 1;
                chain.push(next.to_string());
                url = next;
                continue;
            }
        }
        let content_type = resp
            .headers()
            .get(CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let mut body = Vec::new();
        let cap = policy.body_cap_bytes;
        if let Err(e) = resp.take(cap as u64 + 1).read_to_end(&mut body) {
            let ev = FailureEvidence::Transport {
                message: e.to_string(),
                timed_out: e.kind() == std::io::ErrorKind::TimedOut,
            };
            return fail(ev, format!("{url}: reading body: {e}"));
        }
        let truncated = body.len() > cap;
        body.truncate(cap);
        let ev = FailureEvidence::Response {
            status,
            body_len: body.len(),
        };
        if let Some(kind) = classify_failure(&ev) {
            // HTTP-level outcomes are final; no scheme escalation.
            return Attempt::Done(CrawlOutcome::failure(
                kind,
                format!("{url}: status {status}"),
            ));
        }
        return Attempt::Done(CrawlOutcome::Success(PageSnapshot {
            site: site.clone(),
            vantage: vantage.label.clone(),
            fetch_time,
            final_url: url.to_string(),
            redirect_chain: chain,
            http_status: status,
            content_type,
            body,
            body_truncated: truncated,
            cookies: jar.records,
        }));
    }
}

/// Fetch the site's front page through the vantage, escalating schemes on transport errors.
pub fn fetch_page(site: &SiteEntry, vantage: &VantagePoint, policy: &FetchPolicy) -> CrawlOutcome {
    let run = || {
        let client = match build_client(vantage, policy) {
            Ok(c) => c,
            Err(o) => return o,
        };
        let mut last: Option<(FailureKind, String)> = None;
        let mut details = Vec::new();
        let mut tried = Vec::new();
        for template in &policy.schemes {
            let start = candidate_url(template, &site.domain);
            if tried.contains(&start) {
                continue;
            }
            tried.push(start.clone());
            match attempt(&client, &start, site, vantage, policy) {
                Attempt::Done(o) => return o,
                Attempt::Failed(kind, detail) => {
                    let retry = kind.is_transport();
                    details.push(detail.clone());
                    last = Some((kind, detail));
                    if !retry {
                        break;
                    }
                }
            }
        }
        match last {
            Some((kind, _)) => CrawlOutcome::failure(kind, details.join("; ")),
            None => CrawlOutcome::failure(FailureKind::InternalCrash, "no scheme configured"),
        }
    };
    match catch_unwind(AssertUnwindSafe(run)) {
        Ok(o) => o,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            CrawlOutcome::failure(
                classify_failure(&FailureEvidence::Panic(msg.clone())).unwrap(),
                msg,
            )
        }
    }
}

/// Result of one fetch, with rendered geometry when the backend has it.
pub struct Fetched {
    pub outcome: CrawlOutcome,
    pub layout: Option<Box<dyn LayoutProvider + Send>>,
}

/// A page-loading backend. The static HTTP backend supplies no layout.
pub trait PageFetcher: Send + Sync {
    fn fetch(&self, site: &SiteEntry, vantage: &VantagePoint) -> Fetched;
}

pub struct HttpFetcher {
    pub policy: FetchPolicy,
}

impl PageFetcher for HttpFetcher {
    fn fetch(&self, site: &SiteEntry, vantage: &VantagePoint) -> Fetched {
        Fetched {
            outcome: fetch_page(site, vantage, &self.policy),
            layout: None,
        }
    }
}
