use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{fit_models, write_reports, ReportError};
use crate::harvest::{
    load_filter_list, run_crawl_with, CrawlConfig, HarvestError, HttpFetcher, PageFetcher,
};
use crate::inference::{table3, FitOptions, ObservationRow};
use crate::noticemetrics::{measure_run, write_observations};

pub const PIPELINE_MANIFEST: &str = "pipeline.json";
pub const CRAWL_DIR: &str = "crawl";
pub const OBSERVATIONS_FILE: &str = "observations.jsonl";
pub const FIT_FILE: &str = "fit.json";
pub const REPORTS_DIR: &str = "reports";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    /// Relative to the pipeline output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub name: String,
    pub ok: bool,
    pub error: Option<String>,
}

/// Links every artifact to the config and filter list that produced it.
///
/// Only `started_at` and `finished_at` vary between identical runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineManifest {
    pub config_hash: String,
    pub filter_list: String,
    pub filter_list_version: String,
    pub started_at: DateTime<Utc>,
    pub finished_at: Option<DateTime<Utc>>,
    pub stages: Vec<StageRecord>,
    pub artifacts: Vec<Artifact>,
}

impl PipelineManifest {
    pub fn load(out: &Path) -> Result<Self, ReportError> {
        let p = out.join(PIPELINE_MANIFEST);
        let text = fs::read_to_string(&p).map_err(|e| ReportError::io(&p, e))?;
        serde_json::from_str(&text).map_err(|e| ReportError::Parse(format!("{}: {e}", p.display())))
    }

    pub fn completed(&self) -> bool {
        self.stages.iter().all(|s| s.ok) && self.stages.len() == STAGES.len()
    }
}

pub const STAGES: [&str; 4] = ["crawl", "measure", "fit", "report"];

fn sha256_file(p: &Path) -> Result<String, ReportError> {
    let bytes = fs::read(p).map_err(|e| ReportError::io(p, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

fn relative(out: &Path, p: &Path) -> String {
    p.strip_prefix(out)
        .unwrap_or(p)
        .components()
        .map(|c| c.as_os_str().to_string_lossy().into_owned())
        .collect::<Vec<_>>()
        .join("/")
}

/// Crawl, measure, fit the comparison preset, and emit reports under `out`.
pub fn run_pipeline(config: &CrawlConfig, out: &Path) -> Result<PipelineManifest, ReportError> {
    let fetcher = HttpFetcher {
        policy: config.policy.clone(),
    };
    run_pipeline_with(config, out, &fetcher)
}

/// As [`run_pipeline`] with an explicit fetch backend.
///
/// A failing stage is recorded in the manifest, later stages are skipped, and
/// the error is returned; artifacts of earlier stages stay on disk.
pub fn run_pipeline_with(
    config: &CrawlConfig,
    out: &Path,
    fetcher: &dyn PageFetcher,
) -> Result<PipelineManifest, ReportError> {
    let ruleset = load_filter_list(config)?;
    fs::create_dir_all(out).map_err(|e| ReportError::io(out, e))?;
    let mut manifest = PipelineManifest {
        config_hash: config.config_hash.clone(),
        filter_list: config.filter_list.display().to_string(),
        filter_list_version: ruleset.source_version.clone(),
        started_at: Utc::now(),
        finished_at: None,
        stages: Vec::new(),
        artifacts: Vec::new(),
    };
    let result = stages(config, out, fetcher, &mut manifest);
    if let Err(e) = &result {
        let name = STAGES[manifest.stages.len().min(STAGES.len() - 1)];
        manifest.stages.push(StageRecord {
            name: name.to_string(),
            ok: false,
            error: Some(e.to_string()),
        });
    }
    manifest.finished_at = Some(Utc::now());
    let path = out.join(PIPELINE_MANIFEST);
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes") + "\n";
    fs::write(&path, text).map_err(|e| ReportError::io(&path, e))?;
    result.map(|()| manifest)
}

fn stages(
    config: &CrawlConfig,
    out: &Path,
    fetcher: &dyn PageFetcher,
    manifest: &mut PipelineManifest,
) -> Result<(), ReportError> {
    let done =
        |m: &mut PipelineManifest, name: &str, files: Vec<PathBuf>| -> Result<(), ReportError> {
            for f in files {
                m.artifacts.push(Artifact {
                    path: relative(out, &f),
                    sha256: sha256_file(&f)?,
                });
            }
            m.stages.push(StageRecord {
                name: name.to_string(),
                ok: true,
                error: None,
            });
            Ok(())
        };

    let crawl_dir = out.join(CRAWL_DIR);
    let resume = crawl_dir.join(crate::harvest::MANIFEST_FILE).exists();
    run_crawl_with(config, &crawl_dir, resume, fetcher)?;
    done(
        manifest,
        "crawl",
        vec![
            crawl_dir.join(crate::harvest::OUTCOMES_FILE),
            crawl_dir.join(crate::harvest::MATCHES_FILE),
        ],
    )?;

    let obs = measure_run(&crawl_dir)?;
    let obs_path = out.join(OBSERVATIONS_FILE);
    write_observations(&obs_path, &obs).map_err(|e| ReportError::io(&obs_path, e))?;
    done(manifest, "measure", vec![obs_path])?;

    let rows: Vec<ObservationRow> = obs.iter().map(ObservationRow::from).collect();
    let report = fit_models(&rows, &table3(), FitOptions::default())?;
    let fit_path = out.join(FIT_FILE);
    let text = serde_json::to_string_pretty(&report).expect("fit report serializes") + "\n";
    fs::write(&fit_path, text).map_err(|e| ReportError::io(&fit_path, e))?;
    done(manifest, "fit", vec![fit_path])?;

    let mut files = write_reports(&obs, &out.join(REPORTS_DIR), false)?;
    let models = out.join(REPORTS_DIR).join(super::MODEL_TABLE_FILE);
    fs::write(&models, super::model_table_csv(&report)).map_err(|e| ReportError::io(&models, e))?;
    files.push(models);
    done(manifest, "report", files)?;
    Ok(())
}

impl From<HarvestError> for ReportError {
    fn from(e: HarvestError) -> Self {
        ReportError::Harvest(Box::new(e))
    }
}
