use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::ReportError;
use crate::inference::{confusion_metrics, ConfusionCounts, ConfusionMetrics};
use crate::noticemetrics::BannerObservation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruthLabel {
    Banner,
    NoBanner,
    Failure,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthRow {
    pub domain: String,
    pub vantage: String,
    pub label: TruthLabel,
}

/// Truth CSV with columns `domain`, `vantage`, `label`.
pub fn parse_truth(text: &str) -> Result<Vec<TruthRow>, ReportError> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(|e| ReportError::Parse(format!("truth: {e}"))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub counts: ConfusionCounts,
    pub metrics: Option<ConfusionMetrics>,
    pub accuracy: Option<f64>,
    pub fpr: Option<f64>,
    pub fnr: Option<f64>,
    pub error: Option<String>,
}

/// Confusion counts of predictions against truth; a truth `failure` or a pair
/// absent from the predictions counts as a crawl failure.
pub fn confusion_counts(predictions: &[BannerObservation], truth: &[TruthRow]) -> ConfusionCounts {
    let predicted: HashMap<(&str, &str), bool> = predictions
        .iter()
        .map(|o| {
            (
                (o.site_domain.as_str(), o.vantage_label.as_str()),
                o.banner_exists,
            )
        })
        .collect();
    let mut c = ConfusionCounts::default();
    for t in truth {
        let p = predicted
            .get(&(t.domain.as_str(), t.vantage.as_str()))
            .copied();
        match (t.label, p) {
            (TruthLabel::Failure, _) | (_, None) => c.crawl_failures += 1,
            (TruthLabel::Banner, Some(true)) => c.tp += 1,
            (TruthLabel::Banner, Some(false)) => c.fn_ += 1,
            (TruthLabel::NoBanner, Some(true)) => c.fp += 1,
            (TruthLabel::NoBanner, Some(false)) => c.tn += 1,
        }
    }
    c
}

pub fn evaluate(predictions: &[BannerObservation], truth: &[TruthRow]) -> Evaluation {
    let counts = confusion_counts(predictions, truth);
    match confusion_metrics(&counts) {
        Ok(m) => Evaluation {
            counts,
            accuracy: Some(m.accuracy.value()),
            fpr: Some(m.fpr.value()),
            fnr: Some(m.fnr.value()),
            metrics: Some(m),
            error: None,
        },
        Err(e) => Evaluation {
            counts,
            metrics: None,
            accuracy: None,
            fpr: None,
            fnr: None,
            error: Some(e.to_string()),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pred(domain: &str, banner: bool) -> BannerObservation {
        BannerObservation {
            site_domain: domain.into(),
            tld: "nl".into(),
            vantage_label: "NL".into(),
            vpn_eu: true,
            banner_exists: banner,
            height_px: None,
            word_count: None,
            link_count: None,
            language: "und".into(),
            third_party_persistent_cookies: 0,
            match_count: u32::from(banner),
        }
    }

    #[test]
    fn counts_each_cell() {
        let truth = parse_truth(
            "domain,vantage,label\n\
             a.nl,NL,banner\nb.nl,NL,banner\nc.nl,NL,no_banner\nd.nl,NL,no_banner\n\
             e.nl,NL,failure\nf.nl,NL,banner\n",
        )
        .unwrap();
        let p = [
            pred("a.nl", true),
            pred("b.nl", false),
            pred("c.nl", true),
            pred("d.nl", false),
            pred("e.nl", true),
        ];
        let c = confusion_counts(&p, &truth);
        assert_eq!((c.tp, c.fn_, c.fp, c.tn, c.crawl_failures), (1, 1, 1, 1, 2));
        let e = evaluate(&p, &truth);
        assert!(e.metrics.unwrap().accuracy.equals(1, 2));
    }

    #[test]
    fn bad_label() {
        assert!(parse_truth("domain,vantage,label\na.nl,NL,maybe\n").is_err());
    }
}
