//! Design matrices, logit MLE, model comparison, rank correlation, grouped medians.

mod compare;
mod confusion;
mod design;
mod groups;
mod logit;
mod spearman;
pub mod special;

pub use compare::{compare_models, ComparisonRow};
pub use confusion::{confusion_metrics, ConfusionCounts, ConfusionMetrics, Rate};
pub use design::{
    build_design_matrix, parse_formula, preset, table3, Baseline, DesignMatrix, ModelSpec,
    ObservationRow, Term, Variable, RESPONSE,
};
pub use groups::{group_stats, median, GroupBy, GroupCell, ALL_VANTAGES};
pub use logit::{
    aic, aic_of, fit_design, fit_logit, llr_pvalue, log_likelihood, mcfadden_r2,
    null_log_likelihood, odds_ratio, FitOptions, FitResult, OddsRatio, SEPARATION_BOUND, Z_95,
};
pub use spearman::{average_ranks, spearman, AssociationResult};

#[derive(Debug, Clone, thiserror::Error)]
pub enum InferenceError {
    #[error("no rows")]
    EmptyData,
    #[error("baseline {level:?} of {variable} does not occur in the data")]
    UnknownBaseline { variable: String, level: String },
    #[error("unknown term {0:?}")]
    UnknownTerm(String),
    #[error("formula: {0}")]
    FormulaSyntax(String),
    #[error("design matrix has rank {rank} < {columns} columns")]
    RankDeficient { rank: usize, columns: usize },
    #[error("no convergence after {} iterations", .0.iterations)]
    NotConverged(Box<FitResult>),
    #[error("separation: |beta[{column}]| = {coefficient:.1} at iteration {iteration}")]
    SeparationDetected {
        column: usize,
        coefficient: f64,
        iteration: usize,
    },
    #[error("null log-likelihood is zero (constant response)")]
    DegenerateNull,
    #[error("input has zero rank variance")]
    ConstantInput,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("need at least 3 observations, got {0}")]
    TooFewObservations(usize),
    #[error("need at least 2 models, got {0}")]
    TooFewModels(usize),
    #[error("response must be 0/1")]
    NonBinaryResponse,
    #[error("non-finite input")]
    NonFinite,
    #[error("{0} is undefined: zero denominator")]
    UndefinedRate(&'static str),
}
