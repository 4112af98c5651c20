use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{sig4, ReportError};
use crate::inference::GroupCell;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatmapMetric {
    Prevalence,
    MedianHeight,
}

impl HeatmapMetric {
    pub fn title(self) -> &'static str {
        match self {
            HeatmapMetric::Prevalence => "Banner prevalence",
            HeatmapMetric::MedianHeight => "Median banner height (px)",
        }
    }

    fn value(self, c: &GroupCell) -> Option<f64> {
        match self {
            HeatmapMetric::Prevalence => Some(c.prevalence),
            HeatmapMetric::MedianHeight => c.median_height,
        }
    }
}

/// Vantage rows by TLD columns; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeatmapSpec {
    pub metric: HeatmapMetric,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub cells: Vec<Vec<Option<f64>>>,
    pub min: Option<f64>,
    pub max: Option<f64>,
}

/// Heatmap over (tld, vantage) cells; both axes sorted.
pub fn heatmap_spec(
    cells: &[GroupCell],
    metric: HeatmapMetric,
) -> Result<HeatmapSpec, ReportError> {
    if cells.is_empty() {
        return Err(ReportError::EmptyCells);
    }
    let rows: Vec<String> = cells
        .iter()
        .map(|c| c.vantage.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let cols: Vec<String> = cells
        .iter()
        .map(|c| c.tld.clone())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let lookup: BTreeMap<(&str, &str), Option<f64>> = cells
        .iter()
        .map(|c| ((c.vantage.as_str(), c.tld.as_str()), metric.value(c)))
        .collect();
    let grid: Vec<Vec<Option<f64>>> = rows
        .iter()
        .map(|r| {
            cols.iter()
                .map(|t| lookup.get(&(r.as_str(), t.as_str())).copied().flatten())
                .collect()
        })
        .collect();
    let known = grid.iter().flatten().flatten().copied();
    let min = known.clone().reduce(f64::min);
    let max = known.reduce(f64::max);
    Ok(HeatmapSpec {
        metric,
        rows,
        cols,
        cells: grid,
        min,
        max,
    })
}

/// Header `vantage,.tld...`; values at 4 significant digits, missing cells empty.
pub fn heatmap_csv(spec: &HeatmapSpec) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let mut header = vec!["vantage".to_string()];
    header.extend(spec.cols.iter().map(|t| format!(".{t}")));
    w.write_record(&header).expect("in-memory write");
    for (label, row) in spec.rows.iter().zip(&spec.cells) {
        let mut rec = vec![label.clone()];
        rec.extend(row.iter().map(|v| v.map(sig4).unwrap_or_default()));
        w.write_record(&rec).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Parsed heatmap CSV: (row labels, column labels without dots, cells).
pub type ParsedHeatmap = (Vec<String>, Vec<String>, Vec<Vec<Option<f64>>>);

pub fn parse_heatmap_csv(text: &str) -> Result<ParsedHeatmap, ReportError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let headers = r
        .headers()
        .map_err(|e| ReportError::Parse(e.to_string()))?
        .clone();
    let cols = headers
        .iter()
        .skip(1)
        .map(|h| h.trim_start_matches('.').to_string())
        .collect();
    let mut rows = Vec::new();
    let mut cells = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(|e| ReportError::Parse(e.to_string()))?;
        rows.push(rec.get(0).unwrap_or("").to_string());
        let mut line = Vec::new();
        for v in rec.iter().skip(1) {
            line.push(if v.is_empty() {
                None
            } else {
                Some(
                    v.parse::<f64>()
                        .map_err(|e| ReportError::Parse(format!("{v:?}: {e}")))?,
                )
            });
        }
        cells.push(line);
    }
    Ok((rows, cols, cells))
}

const LOW: (u8, u8, u8) = (0xff, 0xff, 0xcc);
const HIGH: (u8, u8, u8) = (0x80, 0x00, 0x26);
pub const MISSING_FILL: &str = "#d9d9d9";

/// Linear ramp between the fixed low and high anchors.
pub fn ramp(t: f64) -> String {
    let t = if t.is_finite() {
        t.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mix = |a: u8, b: u8| (f64::from(a) + (f64::from(b) - f64::from(a)) * t).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(LOW.0, HIGH.0),
        mix(LOW.1, HIGH.1),
        mix(LOW.2, HIGH.2)
    )
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

const CELL_W: usize = 40;
const CELL_H: usize = 22;
const LEFT: usize = 48;
const TOP: usize = 44;

/// One rect per cell, axis labels, and a text legend stating the colour anchors.
pub fn heatmap_svg(spec: &HeatmapSpec) -> String {
    let width = LEFT + CELL_W * spec.cols.len() + 16;
    let height = TOP + CELL_H * spec.rows.len() + 40;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    s.push_str("<style>text{font-family:sans-serif;font-size:11px}</style>\n");
    let _ = writeln!(
        s,
        r#"<text x="{LEFT}" y="14" font-weight="bold">{}</text>"#,
        esc(spec.metric.title())
    );
    for (j, c) in spec.cols.iter().enumerate() {
        let x = LEFT + j * CELL_W + CELL_W / 2;
        let _ = writeln!(
            s,
            r#"<text class="col-label" x="{x}" y="{}" text-anchor="middle">.{}</text>"#,
            TOP - 6,
            esc(c)
        );
    }
    let (lo, hi) = (spec.min.unwrap_or(0.0), spec.max.unwrap_or(0.0));
    for (i, (label, row)) in spec.rows.iter().zip(&spec.cells).enumerate() {
        let y = TOP + i * CELL_H;
        let _ = writeln!(
            s,
            r#"<text class="row-label" x="{}" y="{}" text-anchor="end">{}</text>"#,
            LEFT - 6,
            y + CELL_H / 2 + 4,
            esc(label)
        );
        for (j, v) in row.iter().enumerate() {
            let x = LEFT + j * CELL_W;
            let (fill, class, shown) = match v {
                Some(v) => {
                    let t = if hi > lo { (v - lo) / (hi - lo) } else { 0.0 };
                    (ramp(t), "cell", sig4(*v))
                }
                None => (MISSING_FILL.to_string(), "missing", "missing".to_string()),
            };
            let _ = writeln!(
                s,
                r#"<rect class="{class}" x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{fill}"><title>{} .{}: {shown}</title></rect>"#,
                esc(label),
                esc(&spec.cols[j])
            );
        }
    }
    let ly = TOP + CELL_H * spec.rows.len() + 20;
    let legend = match (spec.min, spec.max) {
        (Some(a), Some(b)) => format!(
            "min {} = {}, max {} = {}, missing = {MISSING_FILL}",
            sig4(a),
            ramp(0.0),
            sig4(b),
            ramp(1.0)
        ),
        _ => format!("no data, missing = {MISSING_FILL}"),
    };
    let _ = writeln!(
        s,
        r#"<text class="legend" x="{LEFT}" y="{ly}">{}</text>"#,
        esc(&legend)
    );
    s.push_str("</svg>\n");
    s
}
