//! Site lists, vantage-point fetching, failure classification and crawl records.

mod config;
mod crawl;
mod fetch;
mod records;
mod sitelist;
mod vantage;

use std::path::Path;

pub use config::{CrawlConfig, SiteSource, DEFAULT_DELAY_MS, DEFAULT_SITE_LIMIT, DEFAULT_WORKERS};
pub use crawl::{
    load_filter_list, load_sites, read_matches, read_outcomes, run_crawl, run_crawl_with,
    CrawlSummary, RunManifest, RunStatus, MANIFEST_FILE, MATCHES_FILE, OUTCOMES_FILE,
};
pub use fetch::{
    candidate_url, classify_failure, fetch_page, FailureEvidence, FetchPolicy, Fetched,
    HttpFetcher, PageFetcher, DEFAULT_BODY_CAP, DEFAULT_SCHEMES, DEFAULT_USER_AGENT,
};
pub use records::{
    CookieRecord, CrawlOutcome, FailureKind, FetchFailure, MatchRecord, OutcomeRecord,
    PageSnapshot, SiteEntry,
};
pub use sitelist::{load_sitelist, SiteList};
pub use vantage::{is_eu_member, VantagePoint, EU_MEMBERS};

#[derive(Debug, thiserror::Error)]
pub enum HarvestError {
    #[error("site list is missing column {0:?}")]
    MissingColumn(String),
    #[error("site list: {0}")]
    SiteList(String),
    #[error("config: {0}")]
    Config(String),
    #[error("run was started with config {expected}, not {found}")]
    ConfigMismatch { expected: String, found: String },
    #[error("record: {0}")]
    Record(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl HarvestError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        HarvestError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
