use serde::{Deserialize, Serialize};

use super::design::{build_design_matrix, ModelSpec, ObservationRow};
use super::logit::{aic, fit_design, FitOptions, FitResult};
use super::InferenceError;

/// One candidate model; `error` is set and the fit fields empty when fitting failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub formula: String,
    pub aic: Option<f64>,
    pub k: Option<usize>,
    pub log_likelihood: Option<f64>,
    pub error: Option<String>,
    pub fit: Option<FitResult>,
}

/// Fit every spec and rank by ascending AIC; failed fits sort last in input order.
pub fn compare_models(
    rows: &[ObservationRow],
    specs: &[ModelSpec],
    opts: FitOptions,
) -> Result<Vec<ComparisonRow>, InferenceError> {
    if specs.len() < 2 {
        return Err(InferenceError::TooFewModels(specs.len()));
    }
    let mut table: Vec<ComparisonRow> = specs
        .iter()
        .map(|spec| {
            let formula = spec.to_string();
            match build_design_matrix(rows, spec).and_then(|d| fit_design(&d, opts)) {
                Ok(fit) => ComparisonRow {
                    formula,
                    aic: Some(aic(&fit)),
                    k: Some(fit.k),
                    log_likelihood: Some(fit.log_likelihood),
                    error: None,
                    fit: Some(fit),
                },
                Err(e) => ComparisonRow {
                    formula,
                    aic: None,
                    k: None,
                    log_likelihood: None,
                    error: Some(e.to_string()),
                    fit: None,
                },
            }
        })
        .collect();
    table.sort_by(|a, b| match (a.aic, b.aic) {
        (Some(x), Some(y)) => x.total_cmp(&y),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => std::cmp::Ordering::Equal,
    });
    Ok(table)
}
