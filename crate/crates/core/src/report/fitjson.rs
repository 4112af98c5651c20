use serde::{Deserialize, Serialize};

use crate::inference::{
    aic, compare_models, llr_pvalue, mcfadden_r2, odds_ratio, ComparisonRow, FitOptions, FitResult,
    InferenceError, ModelSpec, ObservationRow,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub name: String,
    pub coefficient: f64,
    pub standard_error: f64,
    pub odds_change_pct: f64,
    pub ci_low_pct: f64,
    pub ci_high_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub formula: String,
    pub n: usize,
    pub aic: f64,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    pub mcfadden_r2: Option<f64>,
    pub llr_pvalue: f64,
    pub converged: bool,
    pub iterations: usize,
    pub coefficients: Vec<CoefficientRow>,
}

impl FitReport {
    pub fn new(formula: String, fit: &FitResult) -> Self {
        let coefficients = fit
            .names
            .iter()
            .zip(fit.coefficients.iter().zip(&fit.standard_errors))
            .map(|(name, (&b, &se))| {
                let or = odds_ratio(b, se);
                CoefficientRow {
                    name: name.clone(),
                    coefficient: b,
                    standard_error: se,
                    odds_change_pct: or.pct_change,
                    ci_low_pct: or.ci_low_pct,
                    ci_high_pct: or.ci_high_pct,
                }
            })
            .collect();
        FitReport {
            formula,
            n: fit.n,
            aic: aic(fit),
            log_likelihood: fit.log_likelihood,
            null_log_likelihood: fit.null_log_likelihood,
            mcfadden_r2: mcfadden_r2(fit).ok(),
            llr_pvalue: llr_pvalue(fit),
            converged: fit.converged,
            iterations: fit.iterations,
            coefficients,
        }
    }
}

/// Ranked comparison plus the full report of the lowest-AIC model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub comparison: Vec<ComparisonSummary>,
    pub best: Option<FitReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub formula: String,
    pub aic: Option<f64>,
    pub k: Option<usize>,
    pub log_likelihood: Option<f64>,
    pub error: Option<String>,
}

impl From<&ComparisonRow> for ComparisonSummary {
    fn from(r: &ComparisonRow) -> Self {
        ComparisonSummary {
            formula: r.formula.clone(),
            aic: r.aic,
            k: r.k,
            log_likelihood: r.log_likelihood,
            error: r.error.clone(),
        }
    }
}

pub fn comparison_report(rows: &[ComparisonRow]) -> ComparisonReport {
    ComparisonReport {
        comparison: rows.iter().map(ComparisonSummary::from).collect(),
        best: rows
            .iter()
            .find_map(|r| r.fit.as_ref().map(|f| FitReport::new(r.formula.clone(), f))),
    }
}

/// Fit one spec, or compare several.
pub fn fit_models(
    rows: &[ObservationRow],
    specs: &[ModelSpec],
    opts: FitOptions,
) -> Result<ComparisonReport, InferenceError> {
    if let [spec] = specs {
        let design = crate::inference::build_design_matrix(rows, spec)?;
        let fit = crate::inference::fit_design(&design, opts)?;
        let report = FitReport::new(spec.to_string(), &fit);
        return Ok(ComparisonReport {
            comparison: vec![ComparisonSummary {
                formula: report.formula.clone(),
                aic: Some(report.aic),
                k: Some(fit.k),
                log_likelihood: Some(fit.log_likelihood),
                error: None,
            }],
            best: Some(report),
        });
    }
    Ok(comparison_report(&compare_models(rows, specs, opts)?))
}

/// Formula, k, log-likelihood and AIC per model, best first.
pub fn model_table_csv(report: &ComparisonReport) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(["formula", "k", "log_likelihood", "aic", "error"])
        .expect("in-memory write");
    for r in &report.comparison {
        w.write_record([
            r.formula.clone(),
            r.k.map(|k| k.to_string()).unwrap_or_default(),
            r.log_likelihood
                .map(|v| format!("{v:.3}"))
                .unwrap_or_default(),
            r.aic.map(|v| format!("{v:.3}")).unwrap_or_default(),
            r.error.clone().unwrap_or_default(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}
