use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::sig4;
use crate::inference::{spearman, AssociationResult, GroupCell};
use crate::noticemetrics::{BannerObservation, UNDETERMINED};

/// Most frequent detected language of each TLD's banners; ties go to the smaller code.
pub fn modal_languages(obs: &[BannerObservation]) -> BTreeMap<String, String> {
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for o in obs {
        let entry = counts.entry(o.tld.clone()).or_default();
        if o.banner_exists && o.language != UNDETERMINED {
            *entry.entry(o.language.clone()).or_default() += 1;
        }
    }
    counts
        .into_iter()
        .map(|(tld, langs)| {
            let best = langs
                .into_iter()
                .fold(None::<(String, usize)>, |best, (l, n)| match best {
                    Some((_, bn)) if bn >= n => best,
                    _ => Some((l, n)),
                })
                .map(|(l, _)| l)
                .unwrap_or_else(|| UNDETERMINED.to_string());
            (tld, best)
        })
        .collect()
}

/// Per-TLD table: TLD, Freq(%), Height(px), Words, Links, Language.
///
/// `.com` is left out unless `include_com`.
pub fn tld_table_csv(
    cells: &[GroupCell],
    languages: &BTreeMap<String, String>,
    include_com: bool,
) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["TLD", "Freq(%)", "Height(px)", "Words", "Links", "Language"])
        .expect("in-memory write");
    let opt = |v: Option<f64>| v.map(sig4).unwrap_or_default();
    for c in cells {
        if c.tld == "com" && !include_com {
            continue;
        }
        w.write_record([
            format!(".{}", c.tld),
            sig4(c.prevalence * 100.0),
            opt(c.median_height),
            opt(c.median_words),
            opt(c.median_links),
            languages
                .get(&c.tld)
                .cloned()
                .unwrap_or_else(|| UNDETERMINED.to_string()),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Nearest-rank percentile of an ascending slice.
pub fn nearest_rank(sorted: &[f64], pct: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    // Epsilon keeps exact products such as 0.999 * 1000 from rounding up a rank.
    let rank = (pct * sorted.len() as f64 / 100.0 - 1e-9).ceil().max(1.0) as usize;
    Some(sorted[rank.min(sorted.len()) - 1])
}

pub const OUTLIER_PERCENTILE: f64 = 99.9;

#[derive(Debug, Clone, PartialEq)]
pub struct Scatter {
    pub points: Vec<(u32, u32)>,
    pub removed: usize,
    pub association: Option<AssociationResult>,
}

/// (height, words) of banners with both known, minus points above the 99.9th percentile.
pub fn scatter(obs: &[BannerObservation]) -> Scatter {
    let all: Vec<(u32, u32)> = obs
        .iter()
        .filter_map(|o| Some((o.height_px?, o.word_count?)))
        .collect();
    let sorted = |f: fn(&(u32, u32)) -> u32| {
        let mut v: Vec<f64> = all.iter().map(|p| f64::from(f(p))).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let hmax = nearest_rank(&sorted(|p| p.0), OUTLIER_PERCENTILE).unwrap_or(f64::INFINITY);
    let wmax = nearest_rank(&sorted(|p| p.1), OUTLIER_PERCENTILE).unwrap_or(f64::INFINITY);
    let points: Vec<(u32, u32)> = all
        .iter()
        .copied()
        .filter(|&(h, w)| f64::from(h) <= hmax && f64::from(w) <= wmax)
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| f64::from(p.0)).collect();
    let ys: Vec<f64> = points.iter().map(|p| f64::from(p.1)).collect();
    Scatter {
        removed: all.len() - points.len(),
        association: spearman(&xs, &ys).ok(),
        points,
    }
}

/// Pairs CSV followed by a `#` comment line with the rank correlation.
pub fn scatter_csv(s: &Scatter) -> String {
    let mut out = String::from("height_px,word_count\n");
    for (h, w) in &s.points {
        let _ = writeln!(out, "{h},{w}");
    }
    match &s.association {
        Some(a) => {
            let _ = writeln!(
                out,
                "# spearman rho={:.4} p={} n={} outliers_removed={}",
                a.rho,
                a.p_value.map(sig4).unwrap_or_else(|| "NA".into()),
                a.n,
                s.removed
            );
        }
        None => {
            let _ = writeln!(
                out,
                "# spearman rho=NA n={} outliers_removed={}",
                s.points.len(),
                s.removed
            );
        }
    }
    out
}
