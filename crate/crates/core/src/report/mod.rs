//! Heatmaps, per-TLD tables, scatter data, model tables and the end-to-end pipeline.
//!
//! Emitted numbers carry 4 significant digits with a `.` decimal point.

mod evaluate;
mod fitjson;
mod heatmap;
mod pipeline;
mod tables;

use std::fs;
use std::path::{Path, PathBuf};

pub use evaluate::{confusion_counts, evaluate, parse_truth, Evaluation, TruthLabel, TruthRow};
pub use fitjson::{
    comparison_report, fit_models, model_table_csv, CoefficientRow, ComparisonReport,
    ComparisonSummary, FitReport,
};
pub use heatmap::{
    heatmap_csv, heatmap_spec, heatmap_svg, parse_heatmap_csv, ramp, HeatmapMetric, HeatmapSpec,
    ParsedHeatmap, MISSING_FILL,
};
pub use pipeline::{
    run_pipeline, run_pipeline_with, Artifact, PipelineManifest, StageRecord, CRAWL_DIR, FIT_FILE,
    OBSERVATIONS_FILE, PIPELINE_MANIFEST, REPORTS_DIR, STAGES,
};
pub use tables::{
    modal_languages, nearest_rank, scatter, scatter_csv, tld_table_csv, Scatter, OUTLIER_PERCENTILE,
};

use crate::inference::{group_stats, GroupBy, InferenceError, ObservationRow};
use crate::noticemetrics::BannerObservation;

pub const PREVALENCE_CSV: &str = "heatmap_prevalence.csv";
pub const PREVALENCE_SVG: &str = "heatmap_prevalence.svg";
pub const HEIGHT_CSV: &str = "heatmap_height.csv";
pub const HEIGHT_SVG: &str = "heatmap_height.svg";
pub const TLD_TABLE_FILE: &str = "tld_table.csv";
pub const SCATTER_FILE: &str = "scatter.csv";
pub const MODEL_TABLE_FILE: &str = "models.csv";

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error("no cells to plot")]
    EmptyCells,
    #[error("parse: {0}")]
    Parse(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Harvest(Box<crate::harvest::HarvestError>),
    #[error(transparent)]
    Inference(#[from] InferenceError),
}

impl ReportError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ReportError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

/// `x` rounded to 4 significant digits, printed in the shortest form that parses back to it.
pub fn sig4(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let rounded: f64 = format!("{x:.3e}").parse().expect("formatted float parses");
    // Avoid "-0".
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    format!("{rounded}")
}

/// Write heatmaps, the TLD table and scatter data into `dir`; returns the files written.
pub fn write_reports(
    obs: &[BannerObservation],
    dir: &Path,
    include_com: bool,
) -> Result<Vec<PathBuf>, ReportError> {
    let rows: Vec<ObservationRow> = obs.iter().map(ObservationRow::from).collect();
    let by_vantage = group_stats(&rows, GroupBy::TldVantage);
    let prevalence = heatmap_spec(&by_vantage, HeatmapMetric::Prevalence)?;
    let height = heatmap_spec(&by_vantage, HeatmapMetric::MedianHeight)?;
    let by_tld = group_stats(&rows, GroupBy::Tld);
    let languages = modal_languages(obs);

    fs::create_dir_all(dir).map_err(|e| ReportError::io(dir, e))?;
    let outputs = [
        (PREVALENCE_CSV, heatmap_csv(&prevalence)),
        (PREVALENCE_SVG, heatmap_svg(&prevalence)),
        (HEIGHT_CSV, heatmap_csv(&height)),
        (HEIGHT_SVG, heatmap_svg(&height)),
        (
            TLD_TABLE_FILE,
            tld_table_csv(&by_tld, &languages, include_com),
        ),
        (SCATTER_FILE, scatter_csv(&scatter(obs))),
    ];
    outputs
        .into_iter()
        .map(|(name, text)| {
            let p = dir.join(name);
            fs::write(&p, text).map_err(|e| ReportError::io(&p, e))?;
            Ok(p)
        })
        .collect()
}
