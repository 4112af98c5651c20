//! Bernoulli maximum likelihood by iteratively reweighted least squares.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::special::chi2_sf;
use super::InferenceError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Convergence threshold on max |Xᵀ(y−p)|.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

/// Largest |β| tolerated before declaring separation.
pub const SEPARATION_BOUND: f64 = 30.0;
const RIDGE: f64 = 1e-10;
/// Largest Newton step accepted as converged.
const STEP_TOL: f64 = 1e-6;
/// Relative size of an ℓ change indistinguishable from rounding.
const FLAT_GAIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub log_likelihood: f64,
    pub null_log_likelihood: f64,
    /// Estimated parameters including the intercept.
    pub k: usize,
    /// k − 1.
    pub df: usize,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// ℓ(β) = Σ yᵢηᵢ − ln(1 + e^ηᵢ).
pub fn log_likelihood(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter()
        .zip(y.iter())
        .map(|(&e, &yi)| yi * e - softplus(e))
        .sum()
}

/// Intercept-only maximum, n·[p̄ ln p̄ + (1−p̄) ln(1−p̄)] with 0·ln 0 = 0.
pub fn null_log_likelihood(y: &DVector<f64>) -> f64 {
    let n = y.len() as f64;
    let ones: f64 = y.iter().sum();
    let xlnx = |c: f64| if c > 0.0 { c * (c / n).ln() } else { 0.0 };
    xlnx(ones) + xlnx(n - ones)
}

fn check_inputs(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<(), InferenceError> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(InferenceError::EmptyData);
    }
    if x.nrows() != y.len() {
        return Err(InferenceError::LengthMismatch {
            left: x.nrows(),
            right: y.len(),
        });
    }
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(InferenceError::NonBinaryResponse);
    }
    let sv = x.clone().svd(false, false).singular_values;
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let tol = x.nrows().max(x.ncols()) as f64 * f64::EPSILON * smax;
    let rank = sv.iter().filter(|&&s| s > tol).count();
    if rank < x.ncols() {
        return Err(InferenceError::RankDeficient {
            rank,
            columns: x.ncols(),
        });
    }
    Ok(())
}

struct Newton {
    score: DVector<f64>,
    hessian: DMatrix<f64>,
}

fn newton_terms(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> Newton {
    let eta = x * beta;
    let p = eta.map(sigmoid);
    let resid = y - &p;
    let w = p.map(|pi| pi * (1.0 - pi));
    let mut xw = x.clone();
    for mut col in xw.column_iter_mut() {
        col.component_mul_assign(&w);
    }
    Newton {
        score: x.transpose() * resid,
        hessian: x.transpose() * xw,
    }
}

/// (XᵀWX)⁻¹v via Cholesky, retrying with a tiny ridge on a near-singular W.
fn solve_spd(h: &DMatrix<f64>, v: &DVector<f64>) -> Option<DVector<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.solve(v));
    }
    let mut r = h.clone();
    for i in 0..r.nrows() {
        r[(i, i)] += RIDGE;
    }
    r.cholesky().map(|ch| ch.solve(v))
}

fn inverse_spd(h: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    if let Some(ch) = h.clone().cholesky() {
        return Some(ch.inverse());
    }
    let mut r = h.clone();
    for i in 0..r.nrows() {
        r[(i, i)] += RIDGE;
    }
    r.cholesky().map(|ch| ch.inverse())
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Fit a logit model by Newton/IRLS with step halving.
///
/// ℓ never decreases between accepted iterates by more than rounding. Columns get generic names;
/// use [`fit_design`] to carry design-matrix names.
pub fn fit_logit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    opts: FitOptions,
) -> Result<FitResult, InferenceError> {
    check_inputs(x, y)?;
    let k = x.ncols();
    let mut beta = DVector::zeros(k);
    let mut ll = log_likelihood(x, y, &beta);
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let nt = newton_terms(x, y, &beta);
        let Some(step) = solve_spd(&nt.hessian, &nt.score) else {
            break;
        };
        // Under separation the score vanishes while Newton steps stay large,
        // so convergence also needs a short step.
        if max_abs(&nt.score) <= opts.tol && max_abs(&step) <= STEP_TOL {
            let cand = &beta + &step;
            let cll = log_likelihood(x, y, &cand);
            if cll >= ll - FLAT_GAIN * (1.0 + ll.abs()) {
                beta = cand;
                ll = cll;
            }
            converged = true;
            break;
        }
        if iterations >= opts.max_iter {
            break;
        }
        // Step halving keeps ℓ non-decreasing, except that a full step whose
        // predicted gain is below the rounding of ℓ is taken as is.
        let tiny = 0.5 * nt.score.dot(&step) <= FLAT_GAIN * (1.0 + ll.abs());
        let mut t = 1.0;
        let mut accepted = None;
        while t > 1e-12 {
            let cand = &beta + &step * t;
            let cll = log_likelihood(x, y, &cand);
            if cll >= ll || (tiny && t == 1.0) {
                accepted = Some((cand, cll));
                break;
            }
            t *= 0.5;
        }
        let Some((cand, cll)) = accepted else {
            // No ascent direction left at machine precision.
            converged = max_abs(&nt.score) <= opts.tol;
            break;
        };
        iterations += 1;
        beta = cand;
        ll = cll;
        if let Some((j, b)) = beta
            .iter()
            .enumerate()
            .find(|(_, b)| b.abs() > SEPARATION_BOUND)
        {
            return Err(InferenceError::SeparationDetected {
                column: j,
                coefficient: *b,
                iteration: iterations,
            });
        }
    }
    let nt = newton_terms(x, y, &beta);
    let se = inverse_spd(&nt.hessian)
        .map(|inv| (0..k).map(|i| inv[(i, i)].max(0.0).sqrt()).collect())
        .unwrap_or_else(|| vec![f64::NAN; k]);
    let result = FitResult {
        names: (0..k).map(|j| format!("x{j}")).collect(),
        coefficients: beta.iter().copied().collect(),
        standard_errors: se,
        log_likelihood: ll,
        null_log_likelihood: null_log_likelihood(y),
        k,
        df: k - 1,
        n: x.nrows(),
        converged,
        iterations,
    };
    if converged {
        Ok(result)
    } else {
        Err(InferenceError::NotConverged(Box::new(result)))
    }
}

/// [`fit_logit`] on a design matrix, keeping its column names.
pub fn fit_design(
    design: &super::DesignMatrix,
    opts: FitOptions,
) -> Result<FitResult, InferenceError> {
    let rename = |mut f: FitResult| {
        f.names = design.names.clone();
        f
    };
    match fit_logit(&design.x, &design.y, opts) {
        Ok(f) => Ok(rename(f)),
        Err(InferenceError::NotConverged(f)) => {
            Err(InferenceError::NotConverged(Box::new(rename(*f))))
        }
        Err(e) => Err(e),
    }
}

/// Akaike information criterion 2k − 2ℓ.
pub fn aic(fit: &FitResult) -> f64 {
    aic_of(fit.k, fit.log_likelihood)
}

pub fn aic_of(k: usize, log_likelihood: f64) -> f64 {
    2.0 * k as f64 - 2.0 * log_likelihood
}

/// McFadden pseudo-R², 1 − ℓ/ℓ₀.
pub fn mcfadden_r2(fit: &FitResult) -> Result<f64, InferenceError> {
    if fit.null_log_likelihood >= 0.0 {
        return Err(InferenceError::DegenerateNull);
    }
    Ok(1.0 - fit.log_likelihood / fit.null_log_likelihood)
}

/// Likelihood-ratio test of the fit against the intercept-only model.
pub fn llr_pvalue(fit: &FitResult) -> f64 {
    if fit.k <= 1 {
        return 1.0;
    }
    let stat = (2.0 * (fit.log_likelihood - fit.null_log_likelihood)).max(0.0);
    chi2_sf(stat, (fit.k - 1) as f64)
}

/// Percent change in odds for a coefficient, with a normal-approximation 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddsRatio {
    pub pct_change: f64,
    pub ci_low_pct: f64,
    pub ci_high_pct: f64,
}

impl OddsRatio {
    /// Values rounded to whole percent as reported in tables.
    pub fn rounded(&self) -> (i64, i64, i64) {
        (
            self.pct_change.round() as i64,
            self.ci_low_pct.round() as i64,
            self.ci_high_pct.round() as i64,
        )
    }
}

pub const Z_95: f64 = 1.96;

pub fn odds_ratio(coef: f64, se: f64) -> OddsRatio {
    let pct = |b: f64| b.exp_m1() * 100.0;
    OddsRatio {
        pct_change: pct(coef),
        ci_low_pct: pct(coef - Z_95 * se),
        ci_high_pct: pct(coef + Z_95 * se),
    }
}
