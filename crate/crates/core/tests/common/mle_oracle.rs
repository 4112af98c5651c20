//! Derivative-free logit MLE by compass search with step halving.

/// Bernoulli log-likelihood of row-major `x` (n rows of width k) at `beta`.
pub fn loglik(x: &[Vec<f64>], y: &[f64], beta: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(row, &yi)| {
            let eta: f64 = row.iter().zip(beta).map(|(a, b)| a * b).sum();
            // log(1 + e^eta) without overflow.
            let softplus = if eta > 0.0 {
                eta + (-eta).exp().ln_1p()
            } else {
                eta.exp().ln_1p()
            };
            yi * eta - softplus
        })
        .sum()
}

/// Maximise [`loglik`] by polling ±step along each axis from zero, halving the step
/// whenever no poll improves, until the step is below `min_step`.
pub fn compass_mle(x: &[Vec<f64>], y: &[f64], min_step: f64) -> Vec<f64> {
    let k = x[0].len();
    let mut beta = vec![0.0; k];
    let mut best = loglik(x, y, &beta);
    let mut step = 1.0;
    while step >= min_step {
        let mut improved = false;
        for j in 0..k {
            for dir in [1.0, -1.0] {
                loop {
                    beta[j] += dir * step;
                    let v = loglik(x, y, &beta);
                    if v > best {
                        best = v;
                        improved = true;
                    } else {
                        beta[j] -= dir * step;
                        break;
                    }
                }
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    beta
}
