use super::records::SiteEntry;
use super::HarvestError;

/// Entries taken from a site list plus rows skipped for an empty domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SiteList {
    pub entries: Vec<SiteEntry>,
    pub skipped_empty: usize,
}

fn normalize_tld(s: &str) -> String {
    s.trim().trim_start_matches('.').to_ascii_lowercase()
}

/// First `limit` rows whose TLD column equals `tld`, ranked in file order.
///
/// Headers `Domain` and `TLD` are found case-insensitively; other columns are ignored.
pub fn load_sitelist(csv_content: &str, tld: &str, limit: usize) -> Result<SiteList, HarvestError> {
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(csv_content.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| HarvestError::SiteList(e.to_string()))?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}').eq_ignore_ascii_case(name))
            .ok_or_else(|| HarvestError::MissingColumn(name.to_string()))
    };
    let domain_col = col("Domain")?;
    let tld_col = col("TLD")?;
    let want = normalize_tld(tld);

    let mut out = SiteList {
        entries: Vec::new(),
        skipped_empty: 0,
    };
    for row in reader.records() {
        if out.entries.len() >= limit {
            break;
        }
        let row = row.map_err(|e| HarvestError::SiteList(e.to_string()))?;
        if normalize_tld(row.get(tld_col).unwrap_or("")) != want {
            continue;
        }
        let domain = row
            .get(domain_col)
            .unwrap_or("")
            .trim_end_matches('.')
            .to_ascii_lowercase();
        if domain.is_empty() {
            out.skipped_empty += 1;
            continue;
        }
        out.entries.push(SiteEntry {
            domain,
            tld: want.clone(),
            rank: out.entries.len() as u32 + 1,
        });
    }
    if out.skipped_empty > 0 {
        log::warn!(
            "site list for .{want}: {} rows with empty domain skipped",
            out.skipped_empty
        );
    }
    Ok(out)
}
