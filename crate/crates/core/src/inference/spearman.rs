use serde::{Deserialize, Serialize};

use super::special::student_t_two_sided;
use super::InferenceError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssociationResult {
    pub rho: f64,
    pub n: usize,
    pub p_value: Option<f64>,
}

/// 1-based ranks; tied values share the mean of the ranks they span.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i + 1;
        while j < idx.len() && values[idx[j]] == values[idx[i]] {
            j += 1;
        }
        // Positions i..j hold ranks i+1..=j.
        let r = (i + 1 + j) as f64 / 2.0;
        for &k in &idx[i..j] {
            ranks[k] = r;
        }
        i = j;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    if saa == 0.0 || sbb == 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Spearman's rho with a two-sided Student-t p-value on n − 2 degrees of freedom.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<AssociationResult, InferenceError> {
    if xs.len() != ys.len() {
        return Err(InferenceError::LengthMismatch {
            left: xs.len(),
            right: ys.len(),
        });
    }
    if xs.len() < 3 {
        return Err(InferenceError::TooFewObservations(xs.len()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(InferenceError::NonFinite);
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let rho = pearson(&rx, &ry).ok_or(InferenceError::ConstantInput)?;
    let n = xs.len();
    let dof = (n - 2) as f64;
    let p = if rho.abs() == 1.0 {
        0.0
    } else {
        let t = rho * (dof / (1.0 - rho * rho)).sqrt();
        student_t_two_sided(t, dof)
    };
    Ok(AssociationResult {
        rho,
        n,
        p_value: Some(p),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranks_with_ties() {
        assert_eq!(average_ranks(&[10., 20., 20., 5.]), vec![2., 3.5, 3.5, 1.]);
        assert_eq!(average_ranks(&[]), Vec::<f64>::new());
    }

    #[test]
    fn monotone() {
        let r = spearman(&[1., 2., 3.], &[10., 20., 30.]).unwrap();
        assert_eq!(r.rho, 1.0);
        assert_eq!(r.p_value, Some(0.0));
        assert_eq!(spearman(&[1., 2., 3.], &[3., 2., 1.]).unwrap().rho, -1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            spearman(&[1., 1., 1.], &[1., 2., 3.]),
            Err(InferenceError::ConstantInput)
        ));
        assert!(matches!(
            spearman(&[1., 2.], &[1., 2.]),
            Err(InferenceError::TooFewObservations(2))
        ));
        assert!(matches!(
            spearman(&[1., 2., 3.], &[1., 2.]),
            Err(InferenceError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn known_value() {
        // d² = 0+1+1+0+0 → rho = 1 − 6·2/(5·24) = 0.9.
        let r = spearman(&[1., 2., 3., 4., 5.], &[1., 3., 2., 4., 5.]).unwrap();
        assert!((r.rho - 0.9).abs() < 1e-15);
    }
}
