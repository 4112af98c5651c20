//! Rank correlation from pairwise counts, with no sorting.

/// Rank of `v[i]`: one plus the number of smaller values plus half the other ties.
pub fn counted_ranks(v: &[f64]) -> Vec<f64> {
    v.iter()
        .map(|&a| {
            let less = v.iter().filter(|&&b| b < a).count() as f64;
            let ties = v.iter().filter(|&&b| b == a).count() as f64;
            1.0 + less + (ties - 1.0) / 2.0
        })
        .collect()
}

/// Pearson correlation of counted ranks.
pub fn rho(xs: &[f64], ys: &[f64]) -> f64 {
    let (rx, ry) = (counted_ranks(xs), counted_ranks(ys));
    let n = rx.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
