use serde::{Deserialize, Serialize};

use super::InferenceError;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    /// Pairs outside the accuracy computation.
    pub crawl_failures: u64,
}

/// An exact ratio; convert with [`Rate::value`] only for display.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub num: u64,
    pub den: u64,
}

impl Rate {
    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Cross-multiplied comparison with another ratio.
    pub fn equals(&self, num: u64, den: u64) -> bool {
        u128::from(self.num) * u128::from(den) == u128::from(num) * u128::from(self.den)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMetrics {
    pub accuracy: Rate,
    pub fpr: Rate,
    pub fnr: Rate,
}

fn rate(num: u64, den: u64, what: &'static str) -> Result<Rate, InferenceError> {
    if den == 0 {
        Err(InferenceError::UndefinedRate(what))
    } else {
        Ok(Rate { num, den })
    }
}

pub fn confusion_metrics(c: &ConfusionCounts) -> Result<ConfusionMetrics, InferenceError> {
    Ok(ConfusionMetrics {
        accuracy: rate(c.tp + c.tn, c.tp + c.tn + c.fp + c.fn_, "accuracy")?,
        fpr: rate(c.fp, c.fp + c.tn, "fpr")?,
        fnr: rate(c.fn_, c.fn_ + c.tp, "fnr")?,
    })
}
