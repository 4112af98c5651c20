use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::design::ObservationRow;

pub const ALL_VANTAGES: &str = "ALL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GroupBy {
    Tld,
    TldVantage,
}

/// Aggregates of one TLD (and vantage) group; medians use known values only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupCell {
    pub tld: String,
    /// Vantage label, or `ALL` when grouping by TLD only.
    pub vantage: String,
    pub n: usize,
    pub with_banner: usize,
    pub prevalence: f64,
    pub median_height: Option<f64>,
    pub median_words: Option<f64>,
    pub median_links: Option<f64>,
    pub height_known_n: usize,
}

/// Middle value; the mean of the two middle values for an even count.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    })
}

/// Groups sorted by (tld, vantage).
pub fn group_stats(rows: &[ObservationRow], by: GroupBy) -> Vec<GroupCell> {
    let mut groups: BTreeMap<(String, String), Vec<&ObservationRow>> = BTreeMap::new();
    for r in rows {
        let vantage = match by {
            GroupBy::Tld => ALL_VANTAGES.to_string(),
            GroupBy::TldVantage => r.vpn.clone(),
        };
        groups.entry((r.tld.clone(), vantage)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((tld, vantage), rs)| {
            let known = |f: fn(&ObservationRow) -> Option<f64>| -> Vec<f64> {
                rs.iter().filter_map(|r| f(r)).collect()
            };
            let heights = known(|r| r.height);
            let with_banner = rs.iter().filter(|r| r.banner_exists).count();
            GroupCell {
                tld,
                vantage,
                n: rs.len(),
                with_banner,
                prevalence: with_banner as f64 / rs.len() as f64,
                median_height: median(&heights),
                median_words: median(&known(|r| r.words)),
                median_links: median(&known(|r| r.links)),
                height_known_n: heights.len(),
            }
        })
        .collect()
}
