//! Parallel crawl over (vantage, site) pairs with a single record writer and resume.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::config::CrawlConfig;
use super::fetch::{HttpFetcher, PageFetcher};
use super::records::{CrawlOutcome, MatchRecord, OutcomeRecord, SiteEntry};
use super::sitelist::load_sitelist;
use super::vantage::VantagePoint;
use super::HarvestError;
use crate::domquery::{parse_html, BannerDetector};
use crate::filterlist::{load_list, RuleSet};

pub const OUTCOMES_FILE: &str = "outcomes.jsonl";
pub const MATCHES_FILE: &str = "matches.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Running,
    Complete,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CrawlSummary {
    pub pairs: usize,
    pub successes: usize,
    pub failures: usize,
    pub failure_share: f64,
    pub failures_by_kind: BTreeMap<String, usize>,
    /// Pairs carried over from an interrupted run rather than fetched now.
    pub resumed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub filter_list: String,
    pub filter_list_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: Option<DateTime<Utc>>,
    pub status: RunStatus,
    pub vantages: Vec<VantagePoint>,
    pub sites: Vec<SiteEntry>,
    pub summary: Option<CrawlSummary>,
}

impl RunManifest {
    pub fn load(run_dir: &Path) -> Result<Self, HarvestError> {
        let path = run_dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| HarvestError::io(&path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| HarvestError::Record(format!("{}: {e}", path.display())))
    }

    fn store(&self, run_dir: &Path) -> Result<(), HarvestError> {
        let path = run_dir.join(MANIFEST_FILE);
        let tmp = run_dir.join(".manifest.json.tmp");
        let mut text = serde_json::to_string_pretty(self).expect("manifest serializes");
        text.push('\n');
        fs::write(&tmp, text).map_err(|e| HarvestError::io(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| HarvestError::io(&path, e))
    }
}

/// Load the filter list named by the config; fails before any network activity.
pub fn load_filter_list(config: &CrawlConfig) -> Result<RuleSet, HarvestError> {
    let path = &config.filter_list;
    if !path.is_file() {
        return Err(HarvestError::Config(format!(
            "filter list not found: {}",
            path.display()
        )));
    }
    let text = fs::read_to_string(path).map_err(|e| HarvestError::io(path, e))?;
    Ok(load_list(&text))
}

/// Sites of every configured list in list order, first occurrence of a domain kept.
pub fn load_sites(config: &CrawlConfig) -> Result<Vec<SiteEntry>, HarvestError> {
    let mut seen = HashSet::new();
    let mut sites = Vec::new();
    for src in &config.site_sources {
        let text = fs::read_to_string(&src.path).map_err(|e| HarvestError::io(&src.path, e))?;
        for site in load_sitelist(&text, &src.tld, src.limit)?.entries {
            if seen.insert(site.domain.clone()) {
                sites.push(site);
            }
        }
    }
    Ok(sites)
}

type PairKey = (String, String);

fn pair_key(vantage: &str, domain: &str) -> PairKey {
    (vantage.to_string(), domain.to_string())
}

/// Read complete JSON lines; a torn trailing line is cut off the file.
fn read_complete_lines<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, HarvestError> {
    if !path.exists() {
        return Ok(Vec::new());
    }
    let bytes = fs::read(path).map_err(|e| HarvestError::io(path, e))?;
    let keep = match bytes.iter().rposition(|&b| b == b'\n') {
        Some(i) => i + 1,
        None => 0,
    };
    if keep < bytes.len() {
        log::warn!("{}: dropping partial trailing record", path.display());
        let f = OpenOptions::new()
            .write(true)
            .open(path)
            .map_err(|e| HarvestError::io(path, e))?;
        f.set_len(keep as u64)
            .map_err(|e| HarvestError::io(path, e))?;
    }
    let mut out = Vec::new();
    for (i, line) in bytes[..keep].split(|&b| b == b'\n').enumerate() {
        if line.is_empty() {
            continue;
        }
        let rec = serde_json::from_slice(line)
            .map_err(|e| HarvestError::Record(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

fn write_lines<T: Serialize>(path: &Path, records: &[T]) -> Result<(), HarvestError> {
    let tmp = path.with_extension("jsonl.tmp");
    let f = File::create(&tmp).map_err(|e| HarvestError::io(&tmp, e))?;
    let mut w = BufWriter::new(f);
    for r in records {
        serde_json::to_writer(&mut w, r).expect("record serializes");
        w.write_all(b"\n").map_err(|e| HarvestError::io(&tmp, e))?;
    }
    w.flush().map_err(|e| HarvestError::io(&tmp, e))?;
    drop(w);
    fs::rename(&tmp, path).map_err(|e| HarvestError::io(path, e))
}

fn charset_of(content_type: Option<&str>) -> Option<&str> {
    content_type?
        .split(';')
        .filter_map(|p| p.trim().split_once('='))
        .find(|(k, _)| k.trim().eq_ignore_ascii_case("charset"))
        .map(|(_, v)| v.trim().trim_matches('"'))
}

struct Task<'a> {
    index: usize,
    site: &'a SiteEntry,
    vantage: &'a VantagePoint,
}

struct Done {
    outcome: OutcomeRecord,
    matches: Option<MatchRecord>,
}

fn run_task(task: &Task<'_>, fetcher: &dyn PageFetcher, detector: &BannerDetector<'_>) -> Done {
    let fetched = fetcher.fetch(task.site, task.vantage);
    let matches = fetched.outcome.snapshot().map(|snap| {
        let doc = parse_html(&snap.body, charset_of(snap.content_type.as_deref()));
        let host = url::Url::parse(&snap.final_url)
            .ok()
            .and_then(|u| u.host_str().map(str::to_ascii_lowercase))
            .unwrap_or_else(|| task.site.domain.clone());
        let layout = fetched
            .layout
            .as_deref()
            .map(|l| l as &dyn crate::domquery::LayoutProvider);
        MatchRecord {
            site: task.site.clone(),
            vantage: task.vantage.label.clone(),
            matches: detector.detect(&doc, &host, layout),
        }
    });
    Done {
        outcome: OutcomeRecord {
            site: task.site.clone(),
            vantage: task.vantage.label.clone(),
            outcome: fetched.outcome,
        },
        matches,
    }
}

/// Crawl with the static HTTP backend.
pub fn run_crawl(
    config: &CrawlConfig,
    out: &Path,
    resume: bool,
) -> Result<RunManifest, HarvestError> {
    let fetcher = HttpFetcher {
        policy: config.policy.clone(),
    };
    run_crawl_with(config, out, resume, &fetcher)
}

/// Crawl every (vantage, site) pair once, writing records under `out`.
///
/// Records end up in task order (vantage label, then site-list order) whatever
/// the worker interleaving, so static inputs give identical files.
pub fn run_crawl_with(
    config: &CrawlConfig,
    out: &Path,
    resume: bool,
    fetcher: &dyn PageFetcher,
) -> Result<RunManifest, HarvestError> {
    let ruleset = load_filter_list(config)?;
    let sites = load_sites(config)?;
    fs::create_dir_all(out).map_err(|e| HarvestError::io(out, e))?;
    let outcomes_path = out.join(OUTCOMES_FILE);
    let matches_path = out.join(MATCHES_FILE);

    let (mut manifest, mut done_outcomes, mut done_matches) = if resume {
        let m = RunManifest::load(out)?;
        if m.config_hash != config.config_hash {
            return Err(HarvestError::ConfigMismatch {
                expected: m.config_hash,
                found: config.config_hash.clone(),
            });
        }
        let outcomes: Vec<OutcomeRecord> = read_complete_lines(&outcomes_path)?;
        let matches: Vec<MatchRecord> = read_complete_lines(&matches_path)?;
        (m, outcomes, matches)
    } else {
        if outcomes_path.exists() || out.join(MANIFEST_FILE).exists() {
            return Err(HarvestError::Config(format!(
                "{} already holds a run; pass resume to continue it",
                out.display()
            )));
        }
        let m = RunManifest {
            config_hash: config.config_hash.clone(),
            filter_list: config.filter_list.display().to_string(),
            filter_list_version: ruleset.source_version.clone(),
            started_at: Utc::now(),
            finished_at: None,
            status: RunStatus::Running,
            vantages: config.vantages.clone(),
            sites: sites.clone(),
            summary: None,
        };
        (m, Vec::new(), Vec::new())
    };
    manifest.status = RunStatus::Running;
    manifest.finished_at = None;
    manifest.store(out)?;

    let mut order: HashMap<PairKey, usize> = HashMap::new();
    let mut tasks = Vec::new();
    for v in &config.vantages {
        for s in &sites {
            let index = tasks.len();
            order.insert(pair_key(&v.label, &s.domain), index);
            tasks.push(Task {
                index,
                site: s,
                vantage: v,
            });
        }
    }

    // A pair counts as done only once its outcome line is on disk.
    done_outcomes.retain(|r| order.contains_key(&pair_key(&r.vantage, &r.site.domain)));
    let mut completed: HashSet<PairKey> = HashSet::new();
    done_outcomes.retain(|r| completed.insert(pair_key(&r.vantage, &r.site.domain)));
    let mut kept_matches: HashSet<PairKey> = HashSet::new();
    done_matches.retain(|r| {
        let k = pair_key(&r.vantage, &r.site.domain);
        completed.contains(&k) && kept_matches.insert(k)
    });
    let resumed = completed.len();
    write_lines(&outcomes_path, &done_outcomes)?;
    write_lines(&matches_path, &done_matches)?;

    let pending: Vec<&Task> = tasks
        .iter()
        .filter(|t| !completed.contains(&pair_key(&t.vantage.label, &t.site.domain)))
        .collect();
    log::info!(
        "crawl: {} pairs, {} already done, {} workers",
        tasks.len(),
        resumed,
        config.workers
    );

    let detector = BannerDetector::new(&ruleset);
    let next = AtomicUsize::new(0);
    let open_append = |p: &PathBuf| {
        OpenOptions::new()
            .append(true)
            .open(p)
            .map_err(|e| HarvestError::io(p, e))
    };
    let mut outcomes_w = BufWriter::new(open_append(&outcomes_path)?);
    let mut matches_w = BufWriter::new(open_append(&matches_path)?);

    let write_result: Result<(), HarvestError> = std::thread::scope(|scope| {
        let (tx, rx) = mpsc::channel::<Done>();
        for _ in 0..config.workers.min(pending.len().max(1)) {
            let tx = tx.clone();
            let (pending, next, detector) = (&pending, &next, &detector);
            scope.spawn(move || loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(task) = pending.get(i) else { break };
                log::debug!(
                    "fetch #{} {} via {}",
                    task.index,
                    task.site.domain,
                    task.vantage.label
                );
                if tx.send(run_task(task, fetcher, detector)).is_err() {
                    break;
                }
                if !config.delay.is_zero() {
                    std::thread::sleep(config.delay);
                }
            });
        }
        drop(tx);
        // Single writer: workers never touch the record files.
        for done in rx {
            if let Some(m) = &done.matches {
                serde_json::to_writer(&mut matches_w, m).expect("record serializes");
                matches_w
                    .write_all(b"\n")
                    .and_then(|_| matches_w.flush())
                    .map_err(|e| HarvestError::io(&matches_path, e))?;
            }
            serde_json::to_writer(&mut outcomes_w, &done.outcome).expect("record serializes");
            outcomes_w
                .write_all(b"\n")
                .and_then(|_| outcomes_w.flush())
                .map_err(|e| HarvestError::io(&outcomes_path, e))?;
        }
        Ok(())
    });
    write_result?;
    drop(outcomes_w);
    drop(matches_w);

    let mut outcomes: Vec<OutcomeRecord> = read_complete_lines(&outcomes_path)?;
    let mut matches: Vec<MatchRecord> = read_complete_lines(&matches_path)?;
    let rank = |v: &str, d: &str| order.get(&pair_key(v, d)).copied().unwrap_or(usize::MAX);
    outcomes.sort_by_key(|r| rank(&r.vantage, &r.site.domain));
    matches.sort_by_key(|r| rank(&r.vantage, &r.site.domain));
    write_lines(&outcomes_path, &outcomes)?;
    write_lines(&matches_path, &matches)?;

    let mut summary = CrawlSummary {
        pairs: outcomes.len(),
        resumed,
        ..Default::default()
    };
    for r in &outcomes {
        match &r.outcome {
            CrawlOutcome::Success(_) => summary.successes += 1,
            CrawlOutcome::Failure(f) => {
                summary.failures += 1;
                *summary
                    .failures_by_kind
                    .entry(f.kind.label().to_string())
                    .or_default() += 1;
            }
        }
    }
    if summary.pairs > 0 {
        summary.failure_share = summary.failures as f64 / summary.pairs as f64;
    }
    log::info!(
        "crawl finished: {} pairs, failure share {:.1}%",
        summary.pairs,
        summary.failure_share * 100.0
    );
    manifest.summary = Some(summary);
    manifest.status = RunStatus::Complete;
    manifest.finished_at = Some(Utc::now());
    manifest.store(out)?;
    Ok(manifest)
}

/// All outcome records of a run directory.
pub fn read_outcomes(run_dir: &Path) -> Result<Vec<OutcomeRecord>, HarvestError> {
    read_jsonl(&run_dir.join(OUTCOMES_FILE))
}

/// All raw-match records of a run directory.
pub fn read_matches(run_dir: &Path) -> Result<Vec<MatchRecord>, HarvestError> {
    read_jsonl(&run_dir.join(MATCHES_FILE))
}

fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, HarvestError> {
    let f = File::open(path).map_err(|e| HarvestError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| HarvestError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| HarvestError::Record(format!("{}:{}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}
