use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use super::fetch::{FetchPolicy, DEFAULT_BODY_CAP, DEFAULT_SCHEMES, DEFAULT_USER_AGENT};
use super::vantage::{is_eu_member, VantagePoint};
use super::HarvestError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    workers: Option<usize>,
    timeout_s: Option<f64>,
    max_redirects: Option<u32>,
    body_cap_bytes: Option<usize>,
    filter_list: String,
    delay_ms: Option<u64>,
    user_agent: Option<String>,
    schemes: Option<Vec<String>>,
    #[serde(default)]
    sites: Vec<RawSites>,
    #[serde(default)]
    vantage: BTreeMap<String, RawVantage>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSites {
    path: String,
    tld: String,
    limit: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVantage {
    proxy_url: Option<String>,
    accept_language: String,
    eu_member: Option<bool>,
}

/// One site-list CSV and the TLD slice taken from it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteSource {
    pub path: PathBuf,
    pub tld: String,
    pub limit: usize,
}

/// Validated crawl configuration; relative paths are resolved against the config file.
#[derive(Debug, Clone)]
pub struct CrawlConfig {
    pub workers: usize,
    pub policy: FetchPolicy,
    pub filter_list: PathBuf,
    pub delay: Duration,
    pub site_sources: Vec<SiteSource>,
    /// Sorted by label.
    pub vantages: Vec<VantagePoint>,
    /// Hex SHA-256 of the config text.
    pub config_hash: String,
}

pub const DEFAULT_WORKERS: usize = 5;
pub const DEFAULT_DELAY_MS: u64 = 250;
pub const DEFAULT_SITE_LIMIT: usize = 100;

impl CrawlConfig {
    pub fn load(path: &Path) -> Result<Self, HarvestError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarvestError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base)
    }

    pub fn parse(text: &str, base_dir: &Path) -> Result<Self, HarvestError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| HarvestError::Config(e.to_string()))?;
        let resolve = |p: &str| {
            let p = PathBuf::from(p);
            if p.is_absolute() {
                p
            } else {
                base_dir.join(p)
            }
        };
        let workers = raw.workers.unwrap_or(DEFAULT_WORKERS);
        if workers == 0 {
            return Err(HarvestError::Config("workers must be at least 1".into()));
        }
        let timeout_s = raw.timeout_s.unwrap_or(30.0);
        if !(timeout_s.is_finite() && timeout_s > 0.0) {
            return Err(HarvestError::Config("timeout_s must be positive".into()));
        }
        let schemes = raw
            .schemes
            .unwrap_or_else(|| DEFAULT_SCHEMES.iter().map(|s| s.to_string()).collect());
        if schemes.is_empty() {
            return Err(HarvestError::Config("schemes must not be empty".into()));
        }
        for s in &schemes {
            let scheme = s.split("://").next().unwrap_or("");
            if scheme != "http" && scheme != "https" {
                return Err(HarvestError::Config(format!("unsupported scheme {s:?}")));
            }
        }
        let mut vantages = Vec::new();
        for (label, v) in raw.vantage {
            let label = label.to_ascii_uppercase();
            let derived = is_eu_member(&label);
            if let Some(flag) = v.eu_member {
                if flag != derived {
                    return Err(HarvestError::Config(format!(
                        "vantage {label}: eu_member = {flag} contradicts EU membership"
                    )));
                }
            }
            vantages.push(VantagePoint {
                label,
                proxy_url: v.proxy_url.filter(|p| !p.is_empty()),
                accept_language: v.accept_language,
                eu_member: derived,
            });
        }
        vantages.sort_by(|a, b| a.label.cmp(&b.label));
        if vantages.is_empty() {
            return Err(HarvestError::Config("no [vantage.<CC>] section".into()));
        }
        if raw.sites.is_empty() {
            return Err(HarvestError::Config("no [[sites]] entry".into()));
        }
        let site_sources = raw
            .sites
            .into_iter()
            .map(|s| SiteSource {
                path: resolve(&s.path),
                tld: s.tld.trim_start_matches('.').to_ascii_lowercase(),
                limit: s.limit.unwrap_or(DEFAULT_SITE_LIMIT),
            })
            .collect();
        Ok(CrawlConfig {
            workers,
            policy: FetchPolicy {
                timeout: Duration::from_secs_f64(timeout_s),
                max_redirects: raw.max_redirects.unwrap_or(10),
                user_agent: raw
                    .user_agent
                    .unwrap_or_else(|| DEFAULT_USER_AGENT.to_string()),
                schemes,
                body_cap_bytes: raw.body_cap_bytes.unwrap_or(DEFAULT_BODY_CAP),
            },
            filter_list: resolve(&raw.filter_list),
            delay: Duration::from_millis(raw.delay_ms.unwrap_or(DEFAULT_DELAY_MS)),
            site_sources,
            vantages,
            config_hash: hex::encode(Sha256::digest(text.as_bytes())),
        })
    }
}
