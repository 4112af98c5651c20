use base64::Engine as _;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::domquery::BannerMatch;

/// One ranked entry of a per-TLD top-site list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SiteEntry {
    pub domain: String,
    pub tld: String,
    pub rank: u32,
}

/// A cookie as set by some response of a page load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CookieRecord {
    pub name: String,
    /// Host the cookie is scoped to, without a leading dot.
    pub cookie_domain: String,
    pub path: String,
    pub expires: Option<DateTime<Utc>>,
    pub set_by_url: String,
}

impl CookieRecord {
    pub fn is_persistent(&self, fetch_time: DateTime<Utc>) -> bool {
        self.expires.is_some_and(|e| e > fetch_time)
    }
}

/// Everything kept from a successful page load.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageSnapshot {
    pub site: SiteEntry,
    pub vantage: String,
    pub fetch_time: DateTime<Utc>,
    pub final_url: String,
    /// Requested URL first, final URL last.
    pub redirect_chain: Vec<String>,
    pub http_status: u16,
    pub content_type: Option<String>,
    #[serde(with = "b64")]
    pub body: Vec<u8>,
    pub body_truncated: bool,
    pub cookies: Vec<CookieRecord>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    DnsFailure,
    ConnectFailure,
    TlsFailure,
    /// Final status, always in 400..=599.
    HttpError(u16),
    Timeout,
    EmptyBody,
    InternalCrash,
}

impl FailureKind {
    pub fn label(&self) -> &'static str {
        match self {
            FailureKind::DnsFailure => "dns_failure",
            FailureKind::ConnectFailure => "connect_failure",
            FailureKind::TlsFailure => "tls_failure",
            FailureKind::HttpError(_) => "http_error",
            FailureKind::Timeout => "timeout",
            FailureKind::EmptyBody => "empty_body",
            FailureKind::InternalCrash => "internal_crash",
        }
    }

    /// Failures worth retrying under the next scheme/host variant.
    pub fn is_transport(&self) -> bool {
        matches!(
            self,
            FailureKind::DnsFailure
                | FailureKind::ConnectFailure
                | FailureKind::TlsFailure
                | FailureKind::Timeout
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchFailure {
    pub kind: FailureKind,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrawlOutcome {
    Success(PageSnapshot),
    Failure(FetchFailure),
}

impl CrawlOutcome {
    pub fn failure(kind: FailureKind, detail: impl Into<String>) -> Self {
        CrawlOutcome::Failure(FetchFailure {
            kind,
            detail: detail.into(),
        })
    }

    pub fn snapshot(&self) -> Option<&PageSnapshot> {
        match self {
            CrawlOutcome::Success(s) => Some(s),
            CrawlOutcome::Failure(_) => None,
        }
    }

    pub fn failure_kind(&self) -> Option<FailureKind> {
        match self {
            CrawlOutcome::Success(_) => None,
            CrawlOutcome::Failure(f) => Some(f.kind),
        }
    }

    pub fn final_url(&self) -> Option<&str> {
        self.snapshot().map(|s| s.final_url.as_str())
    }
}

/// One line of `outcomes.jsonl`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub site: SiteEntry,
    pub vantage: String,
    pub outcome: CrawlOutcome,
}

/// One line of `matches.jsonl`; written only for successful fetches.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchRecord {
    pub site: SiteEntry,
    pub vantage: String,
    pub matches: Vec<BannerMatch>,
}

mod b64 {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&base64::engine::general_purpose::STANDARD.encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let text = String::deserialize(d)?;
        base64::engine::general_purpose::STANDARD
            .decode(text.as_bytes())
            .map_err(serde::de::Error::custom)
    }
}
